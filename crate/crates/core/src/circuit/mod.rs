//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered list of [`Op`]s over `n_qubits` qubits and a
//! classical bit register. Gates may carry a [`Condition`] on a classical bit
//! written by an earlier [`Op::Measure`].
//!
//! Two-qubit gate matrices are indexed with the first target as the more
//! significant bit: row `2·b(t0) + b(t1)`.

mod builders;
mod qasm;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{C64, ONE, ZERO};

pub use builders::{
    build_counterfeit_coin, build_ghz, build_qaoa, build_qft, build_quantum_volume, CircuitKind,
    CircuitSpec,
};
pub use qasm::{emit_qasm, parse_qasm_subset};

const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cx,
    Cz,
    Cp(f64),
    Swap,
    /// Arbitrary single-qubit unitary, 2×2 row-major.
    U1(Vec<C64>),
    /// Arbitrary two-qubit unitary, 4×4 row-major.
    U2(Vec<C64>),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Cp(_) | GateKind::Swap | GateKind::U2(_) => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::Rx(_) => "rx",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Cp(_) => "cp",
            GateKind::Swap => "swap",
            GateKind::U1(_) => "unitary1",
            GateKind::U2(_) => "unitary2",
        }
    }

    /// Row-major matrix: 2×2 for one-qubit kinds, 4×4 for two-qubit kinds.
    pub fn matrix(&self) -> Vec<C64> {
        let r = |x: f64| C64::new(x, 0.0);
        let i = |x: f64| C64::new(0.0, x);
        match self {
            GateKind::H => vec![r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)],
            GateKind::X => vec![ZERO, ONE, ONE, ZERO],
            GateKind::Y => vec![ZERO, i(-1.0), i(1.0), ZERO],
            GateKind::Z => vec![ONE, ZERO, ZERO, r(-1.0)],
            GateKind::Rx(t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                vec![r(c), i(-s), i(-s), r(c)]
            }
            GateKind::Ry(t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                vec![r(c), r(-s), r(s), r(c)]
            }
            GateKind::Rz(t) => {
                vec![C64::from_polar(1.0, -t / 2.0), ZERO, ZERO, C64::from_polar(1.0, t / 2.0)]
            }
            GateKind::Cx => permutation4([0, 1, 3, 2]),
            GateKind::Swap => permutation4([0, 2, 1, 3]),
            GateKind::Cz => diagonal4([ONE, ONE, ONE, r(-1.0)]),
            GateKind::Cp(t) => diagonal4([ONE, ONE, ONE, C64::from_polar(1.0, *t)]),
            GateKind::U1(m) | GateKind::U2(m) => m.clone(),
        }
    }

    pub fn inverse(&self) -> GateKind {
        match self {
            GateKind::Rx(t) => GateKind::Rx(-t),
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Cp(t) => GateKind::Cp(-t),
            GateKind::U1(m) => GateKind::U1(adjoint(m, 2)),
            GateKind::U2(m) => GateKind::U2(adjoint(m, 4)),
            other => other.clone(),
        }
    }
}

fn permutation4(cols: [usize; 4]) -> Vec<C64> {
    let mut m = vec![ZERO; 16];
    for (row, &col) in cols.iter().enumerate() {
        m[row * 4 + col] = ONE;
    }
    m
}

fn diagonal4(d: [C64; 4]) -> Vec<C64> {
    let mut m = vec![ZERO; 16];
    for (k, v) in d.into_iter().enumerate() {
        m[k * 4 + k] = v;
    }
    m
}

fn adjoint(m: &[C64], dim: usize) -> Vec<C64> {
    let mut out = vec![ZERO; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[j * dim + i] = m[i * dim + j].conj();
        }
    }
    out
}

/// Returns the 4×4 matrix with the roles of the two qubits exchanged.
pub(crate) fn swap_qubit_roles(m: &[C64]) -> Vec<C64> {
    let flip = |k: usize| ((k & 1) << 1) | (k >> 1);
    let mut out = vec![ZERO; 16];
    for r in 0..4 {
        for c in 0..4 {
            out[flip(r) * 4 + flip(c)] = m[r * 4 + c];
        }
    }
    out
}

fn is_unitary(m: &[C64], dim: usize) -> bool {
    for i in 0..dim {
        for j in 0..dim {
            let dot: C64 = (0..dim).map(|k| m[k * dim + i].conj() * m[k * dim + j]).sum();
            let expect = if i == j { ONE } else { ZERO };
            if (dot - expect).norm() > UNITARY_TOL {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub bit: usize,
    pub value: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Self {
            kind,
            targets,
            condition: None,
        }
    }

    pub fn conditioned(mut self, bit: usize, value: bool) -> Self {
        self.condition = Some(Condition { bit, value });
        self
    }

    pub fn inverse(&self) -> Self {
        Self {
            kind: self.kind.inverse(),
            targets: self.targets.clone(),
            condition: self.condition,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.targets.len() == 2
    }

    /// Checks arity, index bounds, distinct targets and unitarity.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let arity = self.kind.arity();
        if self.targets.len() != arity {
            return Err(Error::InvalidCircuit(format!(
                "{} expects {arity} target(s), got {}",
                self.kind.name(),
                self.targets.len()
            )));
        }
        if let Some(&q) = self.targets.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::InvalidCircuit(format!(
                "qubit {q} out of range for a {n_qubits}-qubit circuit"
            )));
        }
        if arity == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::InvalidCircuit(format!(
                "{} targets must be distinct, got {:?}",
                self.kind.name(),
                self.targets
            )));
        }
        match &self.kind {
            GateKind::U1(m) if m.len() != 4 || !is_unitary(m, 2) => Err(Error::InvalidCircuit(
                "unitary1 matrix is not a 2x2 unitary".into(),
            )),
            GateKind::U2(m) if m.len() != 16 || !is_unitary(m, 4) => Err(Error::InvalidCircuit(
                "unitary2 matrix is not a 4x4 unitary".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Gate(Gate),
    Measure { qubit: usize, clbit: usize },
    /// Measures qubit `i` into classical bit `i` for every qubit.
    MeasureAll,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub name: String,
    pub params: BTreeMap<String, String>,
    /// Count measurement ops toward the total gate count in [`metrics`].
    #[serde(default)]
    pub count_measurements: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    n_clbits: usize,
    ops: Vec<Op>,
    pub meta: CircuitMeta,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidCircuit("a circuit needs at least one qubit".into()));
        }
        Ok(Self {
            n_qubits,
            n_clbits: 0,
            ops: Vec::new(),
            meta: CircuitMeta::default(),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.meta.name = name.into();
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_clbits(&self) -> usize {
        self.n_clbits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn name(&self) -> &str {
        &self.meta.name
    }

    /// Grows the classical register to at least `n` bits.
    pub fn reserve_clbits(&mut self, n: usize) {
        self.n_clbits = self.n_clbits.max(n);
    }

    pub fn push_gate(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        if let Some(cond) = gate.condition {
            self.reserve_clbits(cond.bit + 1);
        }
        self.ops.push(Op::Gate(gate));
        Ok(self)
    }

    pub fn gate(&mut self, kind: GateKind, targets: &[usize]) -> Result<&mut Self> {
        self.push_gate(Gate::new(kind, targets.to_vec()))
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> Result<&mut Self> {
        if qubit >= self.n_qubits {
            return Err(Error::InvalidCircuit(format!(
                "measured qubit {qubit} out of range for a {}-qubit circuit",
                self.n_qubits
            )));
        }
        self.reserve_clbits(clbit + 1);
        self.ops.push(Op::Measure { qubit, clbit });
        Ok(self)
    }

    pub fn measure_all(&mut self) -> &mut Self {
        self.reserve_clbits(self.n_qubits);
        self.ops.push(Op::MeasureAll);
        self
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.ops.iter().filter_map(|op| match op {
            Op::Gate(g) => Some(g),
            _ => None,
        })
    }

    /// True when a measurement is followed by further gates, or any gate is
    /// classically conditioned. Such circuits are re-executed once per shot.
    pub fn has_mid_circuit_measurement(&self) -> bool {
        let mut measured = false;
        for op in &self.ops {
            match op {
                Op::Measure { .. } | Op::MeasureAll => measured = true,
                Op::Gate(g) => {
                    if measured || g.condition.is_some() {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Full invariant check, including that every condition reads a classical
    /// bit written by an earlier measurement.
    pub fn validate(&self) -> Result<()> {
        let mut written = BTreeSet::new();
        for op in &self.ops {
            match op {
                Op::Gate(g) => {
                    g.validate(self.n_qubits)?;
                    if let Some(cond) = g.condition {
                        if !written.contains(&cond.bit) {
                            return Err(Error::UnwrittenClassicalBit(cond.bit));
                        }
                    }
                }
                Op::Measure { qubit, clbit } => {
                    if *qubit >= self.n_qubits {
                        return Err(Error::InvalidCircuit(format!("measured qubit {qubit} out of range")));
                    }
                    written.insert(*clbit);
                }
                Op::MeasureAll => written.extend(0..self.n_qubits),
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub total_gates: usize,
    pub two_qubit_gates: usize,
    pub entanglement_ratio: f64,
    pub depth: usize,
}

/// Gate counts, entanglement ratio `N_2q / N_tot`, and depth.
///
/// Measurements count toward `N_tot` only when the circuit's metadata asks for
/// it (the counterfeit-coin builder does).
pub fn metrics(c: &Circuit) -> CircuitMetrics {
    let mut total = 0usize;
    let mut two = 0usize;
    let mut level = vec![0usize; c.n_qubits];
    for op in &c.ops {
        match op {
            Op::Gate(g) => {
                total += 1;
                if g.is_two_qubit() {
                    two += 1;
                }
                let next = g.targets.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
                for &q in &g.targets {
                    level[q] = next;
                }
            }
            Op::Measure { qubit, .. } => {
                if c.meta.count_measurements {
                    total += 1;
                }
                level[*qubit] += 1;
            }
            Op::MeasureAll => {
                if c.meta.count_measurements {
                    total += 1;
                }
                let next = level.iter().copied().max().unwrap_or(0) + 1;
                level.iter_mut().for_each(|l| *l = next);
            }
        }
    }
    CircuitMetrics {
        total_gates: total,
        two_qubit_gates: two,
        entanglement_ratio: if total == 0 { 0.0 } else { two as f64 / total as f64 },
        depth: level.into_iter().max().unwrap_or(0),
    }
}
