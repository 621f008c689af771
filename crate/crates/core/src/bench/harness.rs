use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_best, FitResult, ModelKind};
use super::memory::{estimate_memory, MemoryGuard, Precision};
use super::BackendKind;
use crate::circuit::{Circuit, CircuitSpec};
use crate::error::{Error, Result};
use crate::mps::{self, MpsOptions, PhaseTimers};
use crate::sv::{self, SvOptions};
use crate::tensor::TruncationConfig;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub backend: BackendKind,
    pub shots: u64,
    pub truncation: TruncationConfig,
    pub seed: u64,
    pub warmup: usize,
    pub repetitions: usize,
    pub guard: MemoryGuard,
    pub threads: Option<usize>,
}

impl BenchConfig {
    /// 1024 shots, one untimed warm-up, ten timed repetitions.
    pub fn new(backend: BackendKind) -> Self {
        Self {
            backend,
            shots: 1024,
            truncation: TruncationConfig::default(),
            seed: 0,
            warmup: 1,
            repetitions: 10,
            guard: MemoryGuard::detect(),
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BenchStatus {
    Ok,
    Infeasible { required_bytes: u128, budget_bytes: u128 },
    Failed(String),
}

impl BenchStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, BenchStatus::Ok)
    }

    pub fn label(&self) -> String {
        match self {
            BenchStatus::Ok => "ok".into(),
            BenchStatus::Infeasible {
                required_bytes,
                budget_bytes,
            } => format!("infeasible: requires {required_bytes} bytes > guard {budget_bytes}"),
            BenchStatus::Failed(msg) => format!("failed: {msg}"),
        }
    }
}

impl Serialize for BenchStatus {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for BenchStatus {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == "ok" {
            return Ok(BenchStatus::Ok);
        }
        if let Some(rest) = text.strip_prefix("infeasible: requires ") {
            let mut parts = rest.split(" bytes > guard ");
            if let (Some(r), Some(b)) = (parts.next(), parts.next()) {
                if let (Ok(required_bytes), Ok(budget_bytes)) = (r.parse(), b.parse()) {
                    return Ok(BenchStatus::Infeasible {
                        required_bytes,
                        budget_bytes,
                    });
                }
            }
        }
        Ok(BenchStatus::Failed(
            text.strip_prefix("failed: ").unwrap_or(&text).to_string(),
        ))
    }
}

/// Timing fields; kept apart from the deterministic part of a record.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_times_s: Vec<f64>,
    pub median_s: f64,
    pub mean_s: f64,
    pub stddev_s: f64,
    /// Mean per timed repetition.
    pub phases: PhaseTimers,
}

impl Timing {
    fn from_samples(wall: Vec<f64>, phases: PhaseTimers) -> Self {
        let n = wall.len();
        if n == 0 {
            return Self::default();
        }
        let mean = wall.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            wall.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let mut sorted = wall.clone();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Self {
            wall_times_s: wall,
            median_s: median,
            mean_s: mean,
            stddev_s: var.sqrt(),
            phases,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub circuit: String,
    pub n_qubits: usize,
    pub backend: BackendKind,
    pub shots: u64,
    pub seed: u64,
    pub warmup: usize,
    pub repetitions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationConfig>,
    pub status: BenchStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_bond_reached: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cumulative_discarded_weight: Option<f64>,
    pub histogram: BTreeMap<String, u64>,
    pub timing: Timing,
}

struct RunOutcome {
    histogram: BTreeMap<String, u64>,
    max_bond: Option<usize>,
    discarded: Option<f64>,
    phases: PhaseTimers,
}

fn run_once<F>(build: &F, bc: &BenchConfig) -> Result<(RunOutcome, f64)>
where
    F: Fn() -> Result<Circuit>,
{
    let circuit = build()?;
    let start = Instant::now();
    let outcome = match bc.backend {
        BackendKind::Sv => {
            let opts = SvOptions {
                guard: Some(bc.guard),
                threads: bc.threads,
            };
            let r = sv::sample(&circuit, bc.shots, bc.seed, &opts)?;
            RunOutcome {
                histogram: r.histogram,
                max_bond: None,
                discarded: None,
                phases: PhaseTimers::default(),
            }
        }
        BackendKind::Mps => {
            let opts = MpsOptions { threads: bc.threads };
            let (r, stats) = mps::sample(&circuit, bc.shots, bc.truncation, bc.seed, &opts)?;
            RunOutcome {
                histogram: r.histogram,
                max_bond: Some(stats.max_bond_reached),
                discarded: Some(stats.cumulative_discarded_weight),
                phases: stats.timers,
            }
        }
    };
    Ok((outcome, start.elapsed().as_secs_f64()))
}

fn feasibility(n: usize, bc: &BenchConfig) -> Result<()> {
    let chi = match bc.backend {
        BackendKind::Sv => 1,
        BackendKind::Mps => {
            let exact_limit = if n / 2 >= usize::BITS as usize - 1 { usize::MAX } else { 1usize << (n / 2) };
            bc.truncation.max_bond.min(exact_limit)
        }
    };
    let est = estimate_memory(bc.backend, n, Precision::Double, chi, bc.guard.budget_bytes)?;
    if est.feasible {
        Ok(())
    } else {
        Err(Error::Infeasible {
            required: est.bytes,
            budget: est.budget_bytes,
        })
    }
}

/// Warm-up runs followed by timed repetitions, rebuilding the circuit each time.
/// Memory refusals and simulation errors end up in `status`.
pub fn run_bench(spec: &CircuitSpec, bc: &BenchConfig) -> BenchRecord {
    run_bench_with(spec.kind.as_str(), spec.n_qubits, || spec.build(), bc)
}

/// Like [`run_bench`] for an arbitrary circuit source; `build` is called once
/// per warm-up and repetition.
pub fn run_bench_with<F>(name: &str, n_qubits: usize, build: F, bc: &BenchConfig) -> BenchRecord
where
    F: Fn() -> Result<Circuit>,
{
    let mut record = BenchRecord {
        circuit: name.to_string(),
        n_qubits,
        backend: bc.backend,
        shots: bc.shots,
        seed: bc.seed,
        warmup: bc.warmup,
        repetitions: bc.repetitions,
        truncation: (bc.backend == BackendKind::Mps).then_some(bc.truncation),
        status: BenchStatus::Ok,
        max_bond_reached: None,
        cumulative_discarded_weight: None,
        histogram: BTreeMap::new(),
        timing: Timing::default(),
    };
    let result = (|| -> Result<()> {
        feasibility(n_qubits, bc)?;
        for _ in 0..bc.warmup {
            run_once(&build, bc)?;
        }
        let mut wall = Vec::with_capacity(bc.repetitions);
        let mut phases = PhaseTimers::default();
        let mut last = None;
        for _ in 0..bc.repetitions {
            let (outcome, secs) = run_once(&build, bc)?;
            wall.push(secs);
            phases.merge(&outcome.phases);
            last = Some(outcome);
        }
        if bc.repetitions > 0 {
            let k = bc.repetitions as f64;
            phases.gate_apply_s /= k;
            phases.svd_s /= k;
            phases.sampling_s /= k;
        }
        record.timing = Timing::from_samples(wall, phases);
        if let Some(o) = last {
            record.histogram = o.histogram;
            record.max_bond_reached = o.max_bond;
            record.cumulative_discarded_weight = o.discarded;
        }
        Ok(())
    })();
    if let Err(e) = result {
        record.status = match e {
            Error::Infeasible { required, budget } => BenchStatus::Infeasible {
                required_bytes: required,
                budget_bytes: budget,
            },
            other => BenchStatus::Failed(other.to_string()),
        };
    }
    record
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<BenchRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear_fit: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_fit: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_model: Option<ModelKind>,
}

/// Benchmarks every qubit count in `ns`. Points run one after another unless
/// `parallel` is set. With `fit`, both scaling models are fitted to the median
/// times of the successful points and the better-R² model is selected.
pub fn sweep(spec: &CircuitSpec, ns: &[usize], bc: &BenchConfig, fit: bool, parallel: bool) -> SweepResult {
    let records: Vec<BenchRecord> = if parallel {
        ns.par_iter().map(|&n| run_bench(&spec.with_n(n), bc)).collect()
    } else {
        ns.iter().map(|&n| run_bench(&spec.with_n(n), bc)).collect()
    };
    let mut result = SweepResult {
        records,
        linear_fit: None,
        power_fit: None,
        selected_model: None,
    };
    if fit {
        let points: Vec<(f64, f64)> = result
            .records
            .iter()
            .filter(|r| r.status.is_ok())
            .map(|r| (r.n_qubits as f64, r.timing.median_s))
            .collect();
        if let Ok((linear, power, chosen)) = fit_best(&points) {
            result.linear_fit = Some(linear);
            result.power_fit = Some(power);
            result.selected_model = Some(chosen);
        }
    }
    result
}

#[derive(Serialize)]
struct CsvRow<'a> {
    circuit: &'a str,
    n: usize,
    backend: &'a str,
    shots: u64,
    seed: u64,
    median_s: Option<f64>,
    mean_s: Option<f64>,
    stddev_s: Option<f64>,
    max_bond: Option<usize>,
    discarded_weight: Option<f64>,
    status: String,
}

/// Columns: `circuit,n,backend,shots,seed,median_s,mean_s,stddev_s,max_bond,discarded_weight,status`.
pub fn write_sweep_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        let ok = r.status.is_ok();
        w.serialize(CsvRow {
            circuit: &r.circuit,
            n: r.n_qubits,
            backend: r.backend.as_str(),
            shots: r.shots,
            seed: r.seed,
            median_s: ok.then_some(r.timing.median_s),
            mean_s: ok.then_some(r.timing.mean_s),
            stddev_s: ok.then_some(r.timing.stddev_s),
            max_bond: r.max_bond_reached,
            discarded_weight: r.cumulative_discarded_weight,
            status: r.status.label(),
        })?;
    }
    w.flush()?;
    Ok(())
}
