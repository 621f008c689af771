//! Shot bookkeeping shared by both simulators.
//!
//! Every shot draws from its own ChaCha stream (`seed`, stream = shot index),
//! so histograms do not depend on how shots are spread over threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleResult {
    /// Outcome bitstrings, qubit `n − 1` first, so the string read as binary
    /// is the basis-state index.
    pub histogram: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl SampleResult {
    pub fn from_outcomes(outcomes: impl IntoIterator<Item = String>, shots: u64, seed: u64) -> Self {
        let mut histogram = BTreeMap::new();
        for o in outcomes {
            *histogram.entry(o).or_insert(0) += 1;
        }
        Self { histogram, shots, seed }
    }

    pub fn count(&self, key: &str) -> u64 {
        self.histogram.get(key).copied().unwrap_or(0)
    }

    /// Counts keyed by basis-state index. Only meaningful for up to 128 qubits.
    pub fn counts_by_index(&self) -> BTreeMap<u128, u64> {
        self.histogram
            .iter()
            .map(|(k, &v)| (u128::from_str_radix(k, 2).expect("bitstring key"), v))
            .collect()
    }

    /// Empirical distribution over basis-state indices.
    pub fn frequencies(&self) -> BTreeMap<u128, f64> {
        self.counts_by_index()
            .into_iter()
            .map(|(k, v)| (k, v as f64 / self.shots as f64))
            .collect()
    }
}

/// Formats basis-state `index` as an `n`-character bitstring.
pub fn index_key(index: u128, n: usize) -> String {
    format!("{index:0n$b}")
}

/// `bits[q]` is the outcome of qubit `q`.
pub fn bits_key(bits: &[bool]) -> String {
    bits.iter().rev().map(|&b| if b { '1' } else { '0' }).collect()
}

pub(crate) fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Draws a Bernoulli outcome from unnormalised weights `(w0, w1)`.
pub(crate) fn draw_bit<R: Rng + ?Sized>(rng: &mut R, w0: f64, w1: f64) -> bool {
    let total = w0 + w1;
    let u: f64 = rng.random();
    u * total >= w0
}

/// Index into a cumulative distribution for a uniform draw.
pub(crate) fn draw_from_cdf<R: Rng + ?Sized>(rng: &mut R, cdf: &[f64]) -> usize {
    let total = *cdf.last().expect("non-empty cdf");
    let u: f64 = rng.random::<f64>() * total;
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Runs `shot` for every shot index, optionally on a dedicated pool of
/// `threads` workers, and returns the outcomes in shot order.
pub(crate) fn run_shots<T, F>(shots: u64, threads: Option<usize>, shot: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let go = || (0..shots).into_par_iter().map(&shot).collect::<Result<Vec<T>>>();
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(go),
        None => go(),
    }
}

/// Total-variation distance between two distributions over the same keys.
pub fn total_variation_distance(p: &BTreeMap<u128, f64>, q: &BTreeMap<u128, f64>) -> f64 {
    let mut keys: Vec<&u128> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_formats() {
        assert_eq!(index_key(5, 4), "0101");
        assert_eq!(bits_key(&[true, false, true, false]), "0101");
    }

    #[test]
    fn cdf_draws_skip_zero_mass() {
        let cdf = [0.0, 0.0, 1.0, 1.0];
        let mut rng = shot_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(draw_from_cdf(&mut rng, &cdf), 2);
        }
    }

    #[test]
    fn run_shots_is_thread_independent() {
        let f = |s: u64| Ok(shot_rng(9, s).random::<u64>());
        let a = run_shots(64, Some(1), f).unwrap();
        let b = run_shots(64, Some(4), f).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tvd_of_disjoint_support_is_one() {
        let p = BTreeMap::from([(0u128, 1.0)]);
        let q = BTreeMap::from([(1u128, 1.0)]);
        assert_eq!(total_variation_distance(&p, &q), 1.0);
    }
}
