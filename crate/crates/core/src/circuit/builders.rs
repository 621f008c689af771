use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::tensor::random_unitary;

/// H on qubit 0 followed by a CX chain.
pub fn build_ghz(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("GHZ needs n >= 2, got {n}")));
    }
    let mut c = Circuit::new(n)?.with_name("ghz");
    c.gate(GateKind::H, &[0])?;
    for i in 0..n - 1 {
        c.gate(GateKind::Cx, &[i, i + 1])?;
    }
    c.meta.params.insert("n".into(), n.to_string());
    Ok(c)
}

/// Quantum Fourier transform ladder.
///
/// `input_bits` is written most significant qubit first (character 0 is qubit
/// `n − 1`); a `1` adds an X to that qubit before the transform.
pub fn build_qft(n: usize, input_bits: Option<&str>, include_swaps: bool) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidArgument("QFT needs n >= 1".into()));
    }
    let mut c = Circuit::new(n)?.with_name("qft");
    if let Some(bits) = input_bits {
        if bits.len() != n {
            return Err(Error::InvalidArgument(format!(
                "input bitstring has length {}, expected {n}",
                bits.len()
            )));
        }
        for (pos, ch) in bits.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => {
                    c.gate(GateKind::X, &[n - 1 - pos])?;
                }
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "input bitstring contains '{other}'"
                    )))
                }
            }
        }
        c.meta.params.insert("input_bits".into(), bits.to_string());
    }
    for i in 0..n {
        c.gate(GateKind::H, &[i])?;
        for k in 1..n - i {
            c.gate(GateKind::Cp(PI / (1u64 << k) as f64), &[i + k, i])?;
        }
    }
    if include_swaps {
        for i in 0..n / 2 {
            c.gate(GateKind::Swap, &[i, n - 1 - i])?;
        }
    }
    c.meta.params.insert("n".into(), n.to_string());
    c.meta.params.insert("swaps".into(), include_swaps.to_string());
    Ok(c)
}

/// `n` layers of Haar-random two-qubit unitaries on randomly paired qubits.
pub fn build_quantum_volume(n: usize, seed: u64) -> Result<Circuit> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "quantum volume needs an even n >= 2, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n)?.with_name("qv");
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..n {
        perm.shuffle(&mut rng);
        for pair in perm.chunks_exact(2) {
            let u = random_unitary(4, &mut rng)?;
            c.gate(GateKind::U2(u.into_data()), pair)?;
        }
    }
    c.meta.params.insert("n".into(), n.to_string());
    c.meta.params.insert("seed".into(), seed.to_string());
    Ok(c)
}

/// Single-layer QAOA on the complete graph with random edge weights.
pub fn build_qaoa(n: usize, seed: u64) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("QAOA needs n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = rng.random_range(0.0..2.0 * PI);
    let beta = rng.random_range(0.0..2.0 * PI);
    let mut c = Circuit::new(n)?.with_name("qaoa");
    for q in 0..n {
        c.gate(GateKind::H, &[q])?;
    }
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.random_range(0.0..2.0 * PI);
            c.gate(GateKind::Cx, &[i, j])?;
            c.gate(GateKind::Rz(2.0 * gamma * w), &[j])?;
            c.gate(GateKind::Cx, &[i, j])?;
        }
    }
    for q in 0..n {
        c.gate(GateKind::Rx(2.0 * beta), &[q])?;
    }
    c.meta.params.insert("n".into(), n.to_string());
    c.meta.params.insert("seed".into(), seed.to_string());
    c.meta.params.insert("gamma".into(), format!("{gamma:?}"));
    c.meta.params.insert("beta".into(), format!("{beta:?}"));
    Ok(c)
}

/// Counterfeit-coin finding with a mid-circuit parity measurement.
///
/// Qubits `0..n−1` are coins and qubit `n − 1` is the ancilla. After the
/// parity check is measured into bit 0, the second half of the circuit only
/// runs when that bit reads 0.
pub fn build_counterfeit_coin(n: usize, counterfeit_index: usize) -> Result<Circuit> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("counterfeit coin needs n >= 3, got {n}")));
    }
    if counterfeit_index >= n - 1 {
        return Err(Error::InvalidArgument(format!(
            "counterfeit index {counterfeit_index} out of range for {} coins",
            n - 1
        )));
    }
    let ancilla = n - 1;
    let coins = 0..ancilla;
    let mut c = Circuit::new(n)?.with_name("counterfeit_coin");
    c.meta.count_measurements = true;
    for q in coins.clone() {
        c.gate(GateKind::H, &[q])?;
    }
    for q in coins.clone() {
        c.gate(GateKind::Cx, &[q, ancilla])?;
    }
    c.measure(ancilla, 0)?;
    for q in coins.clone() {
        c.push_gate(Gate::new(GateKind::H, vec![q]).conditioned(0, false))?;
    }
    c.push_gate(Gate::new(GateKind::X, vec![ancilla]).conditioned(0, false))?;
    c.push_gate(Gate::new(GateKind::Cx, vec![counterfeit_index, ancilla]).conditioned(0, false))?;
    for q in coins {
        c.push_gate(Gate::new(GateKind::H, vec![q]).conditioned(0, false))?;
    }
    c.meta.params.insert("n".into(), n.to_string());
    c.meta
        .params
        .insert("counterfeit_index".into(), counterfeit_index.to_string());
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitKind {
    Ghz,
    Qft,
    Qv,
    Qaoa,
    CounterfeitCoin,
}

impl CircuitKind {
    pub const ALL: [CircuitKind; 5] = [
        CircuitKind::Ghz,
        CircuitKind::Qft,
        CircuitKind::Qv,
        CircuitKind::Qaoa,
        CircuitKind::CounterfeitCoin,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CircuitKind::Ghz => "ghz",
            CircuitKind::Qft => "qft",
            CircuitKind::Qv => "qv",
            CircuitKind::Qaoa => "qaoa",
            CircuitKind::CounterfeitCoin => "counterfeit_coin",
        }
    }
}

impl fmt::Display for CircuitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CircuitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ghz" => Ok(CircuitKind::Ghz),
            "qft" => Ok(CircuitKind::Qft),
            "qv" | "quantum_volume" => Ok(CircuitKind::Qv),
            "qaoa" => Ok(CircuitKind::Qaoa),
            "cc" | "counterfeit_coin" => Ok(CircuitKind::CounterfeitCoin),
            other => Err(Error::InvalidArgument(format!(
                "unknown circuit '{other}'; expected one of: ghz, qft, qv, qaoa, counterfeit_coin"
            ))),
        }
    }
}

/// Everything needed to rebuild a benchmark circuit from scratch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub kind: CircuitKind,
    pub n_qubits: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_bits: Option<String>,
    #[serde(default)]
    pub include_swaps: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterfeit_index: Option<usize>,
}

impl CircuitSpec {
    pub fn new(kind: CircuitKind, n_qubits: usize, seed: u64) -> Self {
        Self {
            kind,
            n_qubits,
            seed,
            input_bits: None,
            include_swaps: false,
            counterfeit_index: None,
        }
    }

    pub fn with_n(&self, n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ..self.clone()
        }
    }

    pub fn build(&self) -> Result<Circuit> {
        let n = self.n_qubits;
        match self.kind {
            CircuitKind::Ghz => build_ghz(n),
            CircuitKind::Qft => build_qft(n, self.input_bits.as_deref(), self.include_swaps),
            CircuitKind::Qv => build_quantum_volume(n, self.seed),
            CircuitKind::Qaoa => build_qaoa(n, self.seed),
            CircuitKind::CounterfeitCoin => {
                let coins = n.saturating_sub(1).max(1);
                let index = self
                    .counterfeit_index
                    .unwrap_or((self.seed % coins as u64) as usize);
                build_counterfeit_coin(n, index)
            }
        }
    }
}
