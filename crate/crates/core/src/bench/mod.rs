//! Benchmark harness, runtime-scaling fits, memory estimation and top-k
//! validation of approximate runs against exact probabilities.

mod fit;
mod harness;
mod memory;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fit::{fit_best, fit_scaling, Coefficients, FitResult, ModelKind};
pub use harness::{
    run_bench, run_bench_with, sweep, write_sweep_csv, BenchConfig, BenchRecord, BenchStatus, SweepResult, Timing,
};
pub use memory::{
    estimate_memory, format_bytes, mps_parameter_bound, parse_bytes, MemoryEstimate, MemoryGuard,
    Precision,
};
pub use validate::{top_k_indices, validate_topk, MpsTopKMode, ValidationConfig, ValidationReport, ValidationRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Sv,
    Mps,
}

impl BackendKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BackendKind::Sv => "sv",
            BackendKind::Mps => "mps",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sv" | "statevector" | "state_vector" => Ok(BackendKind::Sv),
            "mps" => Ok(BackendKind::Mps),
            other => Err(Error::InvalidArgument(format!(
                "unknown backend '{other}'; expected one of: sv, mps"
            ))),
        }
    }
}
