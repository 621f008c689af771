use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::memory::MemoryGuard;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::mps::{self, MpsOptions};
use crate::sv;
use crate::tensor::TruncationConfig;

/// How the approximate side ranks outcomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpsTopKMode {
    /// Rank by sampled frequency.
    #[default]
    Sampled,
    /// Rank by the exact distribution of the truncated MPS.
    Exact,
}

#[derive(Clone, Debug)]
pub struct ValidationConfig {
    pub k: usize,
    pub shots: u64,
    pub max_bonds: Vec<usize>,
    pub seed: u64,
    /// Cutoffs used for every bond cap; `max_bond` is overridden per row.
    pub truncation: TruncationConfig,
    pub mode: MpsTopKMode,
    pub guard: MemoryGuard,
    pub threads: Option<usize>,
}

impl ValidationConfig {
    pub fn new(k: usize, shots: u64, max_bonds: Vec<usize>, seed: u64) -> Self {
        Self {
            k,
            shots,
            max_bonds,
            seed,
            truncation: TruncationConfig::default(),
            mode: MpsTopKMode::Sampled,
            guard: MemoryGuard::detect(),
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub max_bond: usize,
    pub top_k: Vec<u64>,
    pub matches: usize,
    pub max_bond_reached: usize,
    pub cumulative_discarded_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub circuit: String,
    pub n_qubits: usize,
    pub k: usize,
    pub shots: u64,
    pub seed: u64,
    pub mode: MpsTopKMode,
    /// Top-k basis states of the exact state-vector distribution.
    pub reference: Vec<u64>,
    pub reference_probabilities: Vec<f64>,
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    /// Largest tested bond cap whose top-k set differs from the reference.
    pub fn first_failing_max_bond(&self) -> Option<usize> {
        self.rows
            .iter()
            .filter(|r| r.matches < self.k)
            .map(|r| r.max_bond)
            .max()
    }

    /// Decimal states per rank, one column per bond cap; `*` marks a state
    /// that also appears in the reference list.
    pub fn to_table(&self) -> String {
        let mut header = vec!["rank".to_string(), "SV".to_string()];
        header.extend(self.rows.iter().map(|r| format!("chi={}", r.max_bond)));
        let mut lines = vec![header];
        for rank in 0..self.k {
            let mut line = vec![(rank + 1).to_string(), self.reference[rank].to_string()];
            for row in &self.rows {
                line.push(match row.top_k.get(rank) {
                    Some(s) if self.reference.contains(s) => format!("{s}*"),
                    Some(s) => s.to_string(),
                    None => "-".into(),
                });
            }
            lines.push(line);
        }
        let mut footer = vec!["matches".to_string(), format!("{}/{}", self.k, self.k)];
        footer.extend(self.rows.iter().map(|r| format!("{}/{}", r.matches, self.k)));
        lines.push(footer);

        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for l in &lines {
            let cells: Vec<String> = l
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:>w$}"))
                .collect();
            let _ = writeln!(out, "{}", cells.join("  "));
        }
        out
    }
}

/// Indices of the `k` largest values; ties go to the smaller index.
pub fn top_k_indices(values: &[(u64, f64)], k: usize) -> Vec<u64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    sorted.into_iter().take(k).map(|(i, _)| i).collect()
}

/// Exact probabilities are compared at this resolution so that rounding noise
/// cannot reorder states whose probabilities are mathematically equal.
const PROBABILITY_RESOLUTION: f64 = 1e-12;

fn ranked_probabilities(probs: &[f64]) -> Vec<(u64, f64)> {
    probs
        .iter()
        .enumerate()
        .map(|(i, &p)| (i as u64, (p / PROBABILITY_RESOLUTION).round() * PROBABILITY_RESOLUTION))
        .collect()
}

/// Compares the top-k outcomes of MPS runs at each bond cap against the exact
/// state-vector top-k.
pub fn validate_topk(circuit: &Circuit, vc: &ValidationConfig) -> Result<ValidationReport> {
    let n = circuit.n_qubits();
    if circuit.has_mid_circuit_measurement() {
        return Err(Error::InvalidCircuit(
            "top-k validation needs a circuit without mid-circuit measurement".into(),
        ));
    }
    if vc.k == 0 || (n < 64 && vc.k as u128 > 1u128 << n) {
        return Err(Error::InvalidArgument(format!(
            "k = {} must lie in 1..=2^{n}",
            vc.k
        )));
    }
    let probs = sv::probabilities(circuit, &vc.guard)?;
    let reference = top_k_indices(&ranked_probabilities(&probs), vc.k);
    let reference_probabilities = reference.iter().map(|&i| probs[i as usize]).collect();

    let mut rows = Vec::with_capacity(vc.max_bonds.len());
    for &chi in &vc.max_bonds {
        let cfg = TruncationConfig::new(chi, vc.truncation.abs_cutoff, vc.truncation.rel_cutoff)?;
        let (ranked, stats): (Vec<(u64, f64)>, _) = match vc.mode {
            MpsTopKMode::Sampled => {
                let opts = MpsOptions { threads: vc.threads };
                let (res, stats) = mps::sample(circuit, vc.shots, cfg, vc.seed, &opts)?;
                let counts = res
                    .counts_by_index()
                    .into_iter()
                    .map(|(i, c)| (i as u64, c as f64))
                    .collect();
                (counts, stats)
            }
            MpsTopKMode::Exact => {
                let mut state = mps::final_state(circuit, cfg)?;
                let p = state.to_statevector(&vc.guard)?.probabilities();
                (ranked_probabilities(&p), state.take_stats())
            }
        };
        let top_k = top_k_indices(&ranked, vc.k);
        let matches = top_k.iter().filter(|s| reference.contains(s)).count();
        rows.push(ValidationRow {
            max_bond: chi,
            top_k,
            matches,
            max_bond_reached: stats.max_bond_reached,
            cumulative_discarded_weight: stats.cumulative_discarded_weight,
        });
    }
    Ok(ValidationReport {
        circuit: circuit.name().to_string(),
        n_qubits: n,
        k: vc.k,
        shots: vc.shots,
        seed: vc.seed,
        mode: vc.mode,
        reference,
        reference_probabilities,
        rows,
    })
}
