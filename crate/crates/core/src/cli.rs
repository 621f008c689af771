//! Command-line front end: `run`, `sweep`, `validate`, `fit`, `estimate` and
//! `parse`.
//!
//! Truncation parameters resolve as flag > environment > default, using
//! `QCSIM_MPS_MAX_BOND`, `QCSIM_MPS_ABS_CUTOFF` and
//! `QCSIM_MPS_RELATIVE_CUTOFF`. Exit codes: 0 success, 1 usage or runtime
//! error, 2 infeasible simulation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::bench::{
    estimate_memory, fit_best, fit_scaling, parse_bytes, run_bench, run_bench_with, sweep,
    validate_topk, write_sweep_csv, BackendKind, BenchConfig, BenchStatus, FitResult, MemoryGuard,
    ModelKind, MpsTopKMode, Precision, SweepResult, ValidationConfig,
};
use crate::circuit::{emit_qasm, metrics, parse_qasm_subset, CircuitKind, CircuitSpec};
use crate::error::{Error, Result};
use crate::tensor::TruncationConfig;

pub const ENV_MAX_BOND: &str = "QCSIM_MPS_MAX_BOND";
pub const ENV_ABS_CUTOFF: &str = "QCSIM_MPS_ABS_CUTOFF";
pub const ENV_REL_CUTOFF: &str = "QCSIM_MPS_RELATIVE_CUTOFF";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qcsim", version, about = "State-vector and MPS quantum circuit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Benchmark one circuit on one backend and report the histogram.
    Run(RunArgs),
    /// Benchmark a circuit over a range of qubit counts.
    Sweep(SweepArgs),
    /// Compare MPS top-k outcomes against the exact state-vector top-k.
    Validate(ValidateArgs),
    /// Fit linear and power-law runtime models to sweep output.
    Fit(FitArgs),
    /// Estimate backend memory and check it against a budget.
    Estimate(EstimateArgs),
    /// Parse a QASM file and report circuit metrics.
    Parse(ParseArgs),
}

#[derive(Args, Debug, Default, Clone, Copy)]
struct TruncationArgs {
    /// Maximum bond dimension [env: QCSIM_MPS_MAX_BOND, default 64]
    #[arg(long)]
    max_bond: Option<usize>,
    /// Absolute singular-value cutoff [env: QCSIM_MPS_ABS_CUTOFF, default 1e-5]
    #[arg(long)]
    abs_cutoff: Option<f64>,
    /// Relative singular-value cutoff [env: QCSIM_MPS_RELATIVE_CUTOFF, default 1e-5]
    #[arg(long, alias = "relative-cutoff")]
    rel_cutoff: Option<f64>,
}

#[derive(Args, Debug)]
struct CircuitArgs {
    /// ghz, qft, qv, qaoa or counterfeit_coin
    #[arg(long, value_parser = parse_circuit_kind)]
    circuit: Option<CircuitKind>,
    /// Seed for random circuits and sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// QFT input basis state, qubit n-1 first
    #[arg(long)]
    input_bits: Option<String>,
    /// Append the final qubit-reversal swaps to QFT
    #[arg(long)]
    swaps: bool,
    /// Counterfeit coin position (default: seed mod number of coins)
    #[arg(long)]
    counterfeit_index: Option<usize>,
}

impl CircuitArgs {
    fn spec(&self, n: usize) -> Result<CircuitSpec> {
        let kind = self
            .circuit
            .ok_or_else(|| Error::InvalidArgument("--circuit is required".into()))?;
        Ok(CircuitSpec {
            input_bits: self.input_bits.clone(),
            include_swaps: self.swaps,
            counterfeit_index: self.counterfeit_index,
            ..CircuitSpec::new(kind, n, self.seed)
        })
    }
}

#[derive(Args, Debug)]
struct ExecArgs {
    /// sv or mps
    #[arg(long, value_parser = parse_backend, default_value = "mps")]
    backend: BackendKind,
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    /// Timed repetitions
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    /// Untimed warm-up runs
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    /// Threads used for sampling shots (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Memory budget such as 96GiB (default: 75% of available memory)
    #[arg(long, value_parser = parse_budget)]
    budget: Option<u128>,
    /// Drop timing fields so output is byte-for-byte reproducible
    #[arg(long)]
    omit_timing: bool,
    #[arg(long, value_enum, default_value_t = DataFormat::Json)]
    format: DataFormat,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    /// Run a QASM file instead of a built-in circuit
    #[arg(long, conflicts_with = "circuit")]
    qasm: Option<PathBuf>,
    #[arg(long, required_unless_present = "qasm")]
    qubits: Option<usize>,
    #[command(flatten)]
    exec: ExecArgs,
    #[command(flatten)]
    truncation: TruncationArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    /// Qubit counts: a list `4,8,12`, a range `10..=90:10` or `8..=16`
    #[arg(long, value_parser = parse_qubit_list)]
    qubits: QubitList,
    /// Fit both scaling models to the median times
    #[arg(long)]
    fit: bool,
    /// Run the points concurrently
    #[arg(long)]
    parallel: bool,
    #[command(flatten)]
    exec: ExecArgs,
    #[command(flatten)]
    truncation: TruncationArgs,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[arg(long)]
    qubits: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Bond caps to test
    #[arg(long, value_delimiter = ',', default_value = "64,32,16,15,14,13,12,8")]
    chi: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    /// Rank MPS outcomes by sampled frequency or by exact MPS probability
    #[arg(long, value_enum, default_value_t = TopKMode::Sampled)]
    mode: TopKMode,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = parse_budget)]
    budget: Option<u128>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    truncation: TruncationArgs,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Sweep output, CSV or JSON
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = FitModel::Best)]
    model: FitModel,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long, value_parser = parse_backend)]
    backend: BackendKind,
    #[arg(long)]
    qubits: usize,
    #[arg(long, value_parser = parse_precision, default_value = "double")]
    precision: Precision,
    /// Bond cap for the MPS bound (default: resolved max bond)
    #[arg(long)]
    chi: Option<usize>,
    #[arg(long, value_parser = parse_budget)]
    budget: Option<u128>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    format: ReportFormat,
    #[command(flatten)]
    truncation: TruncationArgs,
}

#[derive(Args, Debug)]
struct ParseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Print the circuit back as QASM instead of a JSON summary
    #[arg(long)]
    emit: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DataFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    /// Human-readable text
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TopKMode {
    Sampled,
    Exact,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FitModel {
    Linear,
    Power,
    Best,
}

#[derive(Clone, Debug)]
struct QubitList(Vec<usize>);

fn parse_circuit_kind(s: &str) -> std::result::Result<CircuitKind, String> {
    CircuitKind::from_str(s).map_err(|e| e.to_string())
}

fn parse_backend(s: &str) -> std::result::Result<BackendKind, String> {
    BackendKind::from_str(s).map_err(|e| e.to_string())
}

fn parse_precision(s: &str) -> std::result::Result<Precision, String> {
    Precision::from_str(s).map_err(|e| e.to_string())
}

fn parse_budget(s: &str) -> std::result::Result<u128, String> {
    parse_bytes(s).map_err(|e| e.to_string())
}

fn parse_qubit_list(s: &str) -> std::result::Result<QubitList, String> {
    let bad = || format!("invalid qubit list '{s}'");
    let mut ns = Vec::new();
    if let Some((lo, rest)) = s.split_once("..") {
        let rest = rest.strip_prefix('=').unwrap_or(rest);
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (hi, step.trim().parse::<usize>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if step == 0 || lo > hi {
            return Err(bad());
        }
        ns.extend((lo..=hi).step_by(step));
    } else {
        for part in s.split(',') {
            ns.push(part.trim().parse().map_err(|_| bad())?);
        }
    }
    Ok(QubitList(ns))
}

/// Resolves truncation parameters: flag, then environment, then default.
pub fn resolve_truncation(
    max_bond: Option<usize>,
    abs_cutoff: Option<f64>,
    rel_cutoff: Option<f64>,
    env: &dyn Fn(&str) -> Option<String>,
) -> Result<TruncationConfig> {
    fn from_env<T: FromStr>(env: &dyn Fn(&str) -> Option<String>, key: &str) -> Result<Option<T>> {
        match env(key) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse '{v}'"))),
        }
    }
    let d = TruncationConfig::default();
    let max_bond = match max_bond {
        Some(v) => v,
        None => from_env(env, ENV_MAX_BOND)?.unwrap_or(d.max_bond),
    };
    let abs_cutoff = match abs_cutoff {
        Some(v) => v,
        None => from_env(env, ENV_ABS_CUTOFF)?.unwrap_or(d.abs_cutoff),
    };
    let rel_cutoff = match rel_cutoff {
        Some(v) => v,
        None => from_env(env, ENV_REL_CUTOFF)?.unwrap_or(d.rel_cutoff),
    };
    TruncationConfig::new(max_bond, abs_cutoff, rel_cutoff)
}

fn guard(budget: Option<u128>) -> MemoryGuard {
    budget.map(MemoryGuard::new).unwrap_or_else(MemoryGuard::detect)
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with<I, T>(
    args: I,
    env: impl Fn(&str) -> Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, &env, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Infeasible { .. } => EXIT_INFEASIBLE,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn execute(cmd: Command, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Run(a) => cmd_run(a, env, out),
        Command::Sweep(a) => cmd_sweep(a, env, out),
        Command::Validate(a) => cmd_validate(a, env, out),
        Command::Fit(a) => cmd_fit(a, out),
        Command::Estimate(a) => cmd_estimate(a, env, out),
        Command::Parse(a) => cmd_parse(a, out),
    }
}

fn bench_config(exec: &ExecArgs, t: TruncationArgs, seed: u64, env: &dyn Fn(&str) -> Option<String>) -> Result<BenchConfig> {
    Ok(BenchConfig {
        backend: exec.backend,
        shots: exec.shots,
        truncation: resolve_truncation(t.max_bond, t.abs_cutoff, t.rel_cutoff, env)?,
        seed,
        warmup: exec.warmup,
        repetitions: exec.repetitions,
        guard: guard(exec.budget),
        threads: exec.threads,
    })
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T, omit_timing: bool) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    if omit_timing {
        strip_timing(&mut v);
    }
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    Ok(text)
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("timing");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn status_code(status: &BenchStatus) -> i32 {
    match status {
        BenchStatus::Ok => EXIT_OK,
        BenchStatus::Infeasible { .. } => EXIT_INFEASIBLE,
        BenchStatus::Failed(_) => EXIT_USAGE,
    }
}

fn cmd_run(a: RunArgs, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write) -> Result<i32> {
    let bc = bench_config(&a.exec, a.truncation, a.circuit.seed, env)?;
    let record = match &a.qasm {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let circuit = parse_qasm_subset(&text)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "qasm".into());
            run_bench_with(&name, circuit.n_qubits(), || parse_qasm_subset(&text), &bc)
        }
        None => {
            let n = a
                .qubits
                .ok_or_else(|| Error::InvalidArgument("--qubits is required".into()))?;
            run_bench(&a.circuit.spec(n)?, &bc)
        }
    };
    let text = match a.exec.format {
        DataFormat::Json => to_json(&record, a.exec.omit_timing)?,
        DataFormat::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(std::slice::from_ref(&record), &mut buf)?;
            String::from_utf8_lossy(&buf).into_owned()
        }
    };
    write_output(a.exec.out.as_deref(), &text, out)?;
    Ok(status_code(&record.status))
}

fn cmd_sweep(a: SweepArgs, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write) -> Result<i32> {
    let bc = bench_config(&a.exec, a.truncation, a.circuit.seed, env)?;
    let ns = &a.qubits.0;
    let first = *ns
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty qubit list".into()))?;
    let spec = a.circuit.spec(first)?;
    let result = sweep(&spec, ns, &bc, a.fit, a.parallel);
    let text = match a.exec.format {
        DataFormat::Json => to_json(&result, a.exec.omit_timing)?,
        DataFormat::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&result.records, &mut buf)?;
            String::from_utf8_lossy(&buf).into_owned()
        }
    };
    write_output(a.exec.out.as_deref(), &text, out)?;
    Ok(EXIT_OK)
}

fn cmd_validate(a: ValidateArgs, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write) -> Result<i32> {
    let t = a.truncation;
    let cfg = resolve_truncation(t.max_bond, t.abs_cutoff, t.rel_cutoff, env)?;
    let circuit = a.circuit.spec(a.qubits)?.build()?;
    let vc = ValidationConfig {
        truncation: cfg,
        mode: match a.mode {
            TopKMode::Sampled => MpsTopKMode::Sampled,
            TopKMode::Exact => MpsTopKMode::Exact,
        },
        guard: guard(a.budget),
        threads: a.threads,
        ..ValidationConfig::new(a.k, a.shots, a.chi.clone(), a.circuit.seed)
    };
    let report = validate_topk(&circuit, &vc)?;
    let text = match a.format {
        ReportFormat::Table => report.to_table(),
        ReportFormat::Json => to_json(&report, false)?,
    };
    write_output(a.out.as_deref(), &text, out)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct FitOutput {
    points: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    linear: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power: Option<FitResult>,
    selected_model: ModelKind,
}

/// `(n, median seconds)` of the successful points in sweep output.
fn read_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let sweep: SweepResult = serde_json::from_str(&text)?;
        return Ok(sweep
            .records
            .iter()
            .filter(|r| r.status.is_ok())
            .map(|r| (r.n_qubits as f64, r.timing.median_s))
            .collect());
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("CSV column '{name}' missing")))
    };
    let (n_col, t_col) = (col("n")?, col("median_s")?);
    let status_col = headers.iter().position(|h| h == "status");
    let mut points = Vec::new();
    for row in rdr.records() {
        let row = row?;
        if status_col.is_some_and(|c| row.get(c) != Some("ok")) {
            continue;
        }
        let field = |c: usize| -> Result<f64> {
            let v = row.get(c).unwrap_or("");
            v.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad number '{v}' in CSV")))
        };
        points.push((field(n_col)?, field(t_col)?));
    }
    Ok(points)
}

fn cmd_fit(a: FitArgs, out: &mut dyn Write) -> Result<i32> {
    let points = read_points(&a.input)?;
    let output = match a.model {
        FitModel::Best => {
            let (linear, power, chosen) = fit_best(&points)?;
            FitOutput {
                points,
                linear: Some(linear),
                power: Some(power),
                selected_model: chosen,
            }
        }
        FitModel::Linear => FitOutput {
            linear: Some(fit_scaling(&points, ModelKind::Linear)?),
            points,
            power: None,
            selected_model: ModelKind::Linear,
        },
        FitModel::Power => FitOutput {
            power: Some(fit_scaling(&points, ModelKind::Power)?),
            points,
            linear: None,
            selected_model: ModelKind::Power,
        },
    };
    write_output(a.out.as_deref(), &to_json(&output, false)?, out)?;
    Ok(EXIT_OK)
}

fn cmd_estimate(a: EstimateArgs, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write) -> Result<i32> {
    let chi = match a.chi {
        Some(c) => c,
        None => {
            let t = a.truncation;
            resolve_truncation(t.max_bond, t.abs_cutoff, t.rel_cutoff, env)?.max_bond
        }
    };
    let budget = guard(a.budget).budget_bytes;
    let est = estimate_memory(a.backend, a.qubits, a.precision, chi, budget)?;
    let text = match a.format {
        ReportFormat::Table => format!("{est}\n"),
        ReportFormat::Json => to_json(&est, false)?,
    };
    write_output(None, &text, out)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ParseSummary<'a> {
    name: &'a str,
    n_qubits: usize,
    n_clbits: usize,
    total_gates: usize,
    two_qubit_gates: usize,
    entanglement_ratio: f64,
    depth: usize,
    mid_circuit_measurement: bool,
}

fn cmd_parse(a: ParseArgs, out: &mut dyn Write) -> Result<i32> {
    let text = fs::read_to_string(&a.input)?;
    let circuit = parse_qasm_subset(&text)?;
    if a.emit {
        write_output(None, &emit_qasm(&circuit), out)?;
        return Ok(EXIT_OK);
    }
    let m = metrics(&circuit);
    let summary = ParseSummary {
        name: circuit.name(),
        n_qubits: circuit.n_qubits(),
        n_clbits: circuit.n_clbits(),
        total_gates: m.total_gates,
        two_qubit_gates: m.two_qubit_gates,
        entanglement_ratio: m.entanglement_ratio,
        depth: m.depth,
        mid_circuit_measurement: circuit.has_mid_circuit_measurement(),
    };
    write_output(None, &to_json(&summary, false)?, out)?;
    Ok(EXIT_OK)
}
