use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BackendKind;
use crate::error::{Error, Result};

const GIB: u128 = 1 << 30;
const FALLBACK_BUDGET: u128 = 8 * GIB;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Single,
    Double,
}

impl Precision {
    /// Bytes per complex value.
    pub fn complex_bytes(self) -> u128 {
        match self {
            Precision::Single => 8,
            Precision::Double => 16,
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" | "fp32" | "complex64" => Ok(Precision::Single),
            "double" | "fp64" | "complex128" => Ok(Precision::Double),
            other => Err(Error::InvalidArgument(format!(
                "unknown precision '{other}'; expected single or double"
            ))),
        }
    }
}

/// Refuses allocations above a byte budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryGuard {
    pub budget_bytes: u128,
}

impl MemoryGuard {
    pub fn new(budget_bytes: u128) -> Self {
        Self { budget_bytes }
    }

    pub fn unlimited() -> Self {
        Self {
            budget_bytes: u128::MAX,
        }
    }

    /// 75% of the memory the OS reports as available, or 8 GiB when that
    /// cannot be read.
    pub fn detect() -> Self {
        let available = std::fs::read_to_string("/proc/meminfo")
            .ok()
            .and_then(|text| {
                text.lines()
                    .find(|l| l.starts_with("MemAvailable:"))
                    .and_then(|l| l.split_whitespace().nth(1))
                    .and_then(|kb| kb.parse::<u128>().ok())
            })
            .map(|kb| kb * 1024);
        Self {
            budget_bytes: available.map_or(FALLBACK_BUDGET, |b| b / 4 * 3),
        }
    }

    pub fn check(&self, required: u128) -> Result<()> {
        if required > self.budget_bytes {
            Err(Error::Infeasible {
                required,
                budget: self.budget_bytes,
            })
        } else {
            Ok(())
        }
    }

    /// Bytes for a double-precision state vector of `n` qubits.
    pub fn check_state_vector(&self, n: usize) -> Result<()> {
        self.check(state_vector_values(n).saturating_mul(Precision::Double.complex_bytes()))
    }
}

impl Default for MemoryGuard {
    fn default() -> Self {
        Self::detect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryEstimate {
    pub backend: BackendKind,
    pub n_qubits: usize,
    pub precision: Precision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_bond: Option<usize>,
    /// Number of complex values stored.
    pub values: u128,
    pub bytes: u128,
    pub budget_bytes: u128,
    pub feasible: bool,
}

impl fmt::Display for MemoryEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.feasible { "feasible" } else { "infeasible" };
        write!(f, "{}, {verdict}", format_bytes(self.bytes))
    }
}

fn state_vector_values(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        1u128 << n
    }
}

/// Upper bound on the number of complex values in an MPS: `d · n · χ²` with `d = 2`.
pub fn mps_parameter_bound(n: usize, max_bond: usize) -> u128 {
    let chi = max_bond as u128;
    2u128.saturating_mul(n as u128).saturating_mul(chi.saturating_mul(chi))
}

/// Memory needed by a backend and whether it fits `budget_bytes`.
///
/// State vectors hold `2^n` values; MPS estimates use the `2·n·χ²` bound.
pub fn estimate_memory(
    backend: BackendKind,
    n: usize,
    precision: Precision,
    max_bond: usize,
    budget_bytes: u128,
) -> Result<MemoryEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("qubit count must be at least 1".into()));
    }
    let (values, max_bond) = match backend {
        BackendKind::Sv => (state_vector_values(n), None),
        BackendKind::Mps => (mps_parameter_bound(n, max_bond), Some(max_bond)),
    };
    let bytes = values.saturating_mul(precision.complex_bytes());
    Ok(MemoryEstimate {
        backend,
        n_qubits: n,
        precision,
        max_bond,
        values,
        bytes,
        budget_bytes,
        feasible: bytes <= budget_bytes,
    })
}

const UNITS: [(&str, u32); 7] = [
    ("B", 0),
    ("KiB", 10),
    ("MiB", 20),
    ("GiB", 30),
    ("TiB", 40),
    ("PiB", 50),
    ("EiB", 60),
];

/// Binary-unit rendering, e.g. `64 GiB` or `12.5 MiB`.
pub fn format_bytes(bytes: u128) -> String {
    let (unit, shift) = UNITS
        .iter()
        .rev()
        .find(|(_, s)| bytes >= 1u128 << s)
        .copied()
        .unwrap_or(("B", 0));
    let value = bytes as f64 / (1u128 << shift) as f64;
    let text = format!("{value:.3}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    format!("{text} {unit}")
}

/// Parses sizes such as `96GiB`, `512 MiB`, `16GB` (decimal) or a bare byte count.
pub fn parse_bytes(text: &str) -> Result<u128> {
    let t = text.trim();
    let split = t
        .find(|c: char| !(c.is_ascii_digit() || c == '.'))
        .unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let value: f64 = num
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("malformed size '{text}'")))?;
    let scale: f64 = match unit.trim().to_ascii_lowercase().as_str() {
        "" | "b" => 1.0,
        "kib" => 1024f64,
        "mib" => 1024f64.powi(2),
        "gib" => 1024f64.powi(3),
        "tib" => 1024f64.powi(4),
        "pib" => 1024f64.powi(5),
        "kb" => 1e3,
        "mb" => 1e6,
        "gb" => 1e9,
        "tb" => 1e12,
        "pb" => 1e15,
        other => {
            return Err(Error::InvalidArgument(format!("unknown size unit '{other}'")));
        }
    };
    Ok((value * scale).round() as u128)
}
