//! Exact state-vector simulation.
//!
//! Amplitudes are stored little-endian: qubit 0 is the least significant bit
//! of the basis-state index.

use rand::Rng;

use crate::bench::MemoryGuard;
use crate::circuit::{Circuit, Gate, Op};
use crate::error::{Error, Result};
use crate::sampling::{draw_bit, draw_from_cdf, index_key, run_shots, shot_rng, SampleResult};
use crate::tensor::{C64, ONE, ZERO};

const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
    classical_bits: Vec<Option<bool>>,
}

impl StateVector {
    /// `|0…0⟩`, refused when the guard cannot hold `2^n` double-precision values.
    pub fn new(n_qubits: usize, guard: &MemoryGuard) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("state vector needs at least one qubit".into()));
        }
        guard.check_state_vector(n_qubits)?;
        let mut amplitudes = vec![ZERO; 1usize << n_qubits];
        amplitudes[0] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
            classical_bits: Vec::new(),
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(format!("{len} amplitudes is not a power of two >= 2")));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
            classical_bits: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn classical_bits(&self) -> &[Option<bool>] {
        &self.classical_bits
    }

    pub fn classical_bit(&self, bit: usize) -> Option<bool> {
        self.classical_bits.get(bit).copied().flatten()
    }

    pub(crate) fn set_classical_bit(&mut self, bit: usize, value: bool) {
        if self.classical_bits.len() <= bit {
            self.classical_bits.resize(bit + 1, None);
        }
        self.classical_bits[bit] = Some(value);
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies a gate, honouring its classical condition.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        if let Some(cond) = gate.condition {
            let bit = self
                .classical_bit(cond.bit)
                .ok_or(Error::UnwrittenClassicalBit(cond.bit))?;
            if bit != cond.value {
                return Ok(());
            }
        }
        let m = gate.kind.matrix();
        match gate.targets.as_slice() {
            &[q] => self.apply_1q(&m, q),
            &[a, b] => self.apply_2q(&m, a, b),
            _ => unreachable!("validated arity"),
        }
        Ok(())
    }

    pub(crate) fn apply_1q(&mut self, m: &[C64], q: usize) {
        let mask = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & mask != 0 {
                continue;
            }
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | mask]);
            self.amplitudes[i] = m[0] * a0 + m[1] * a1;
            self.amplitudes[i | mask] = m[2] * a0 + m[3] * a1;
        }
    }

    /// `m` is indexed with `a` as the more significant of the two gate qubits.
    pub(crate) fn apply_2q(&mut self, m: &[C64], a: usize, b: usize) {
        let (ma, mb) = (1usize << a, 1usize << b);
        for i in 0..self.amplitudes.len() {
            if i & (ma | mb) != 0 {
                continue;
            }
            let idx = [i, i | mb, i | ma, i | ma | mb];
            let v = idx.map(|k| self.amplitudes[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amplitudes[k] = (0..4).map(|c| m[r * 4 + c] * v[c]).sum();
            }
        }
    }

    /// Projective measurement of `qubit`, recorded in `clbit`.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubit: usize, clbit: usize, rng: &mut R) -> Result<bool> {
        if qubit >= self.n_qubits {
            return Err(Error::InvalidArgument(format!("qubit {qubit} out of range")));
        }
        let mask = 1usize << qubit;
        let p1: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let p0 = (self.norm_sqr() - p1).max(0.0);
        let outcome = draw_bit(rng, p0, p1);
        let keep = if outcome { p1 } else { p0 };
        let scale = 1.0 / keep.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if ((i & mask) != 0) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        self.set_classical_bit(clbit, outcome);
        Ok(outcome)
    }

    pub fn execute<R: Rng + ?Sized>(&mut self, op: &Op, rng: &mut R) -> Result<()> {
        match op {
            Op::Gate(g) => self.apply(g),
            Op::Measure { qubit, clbit } => self.measure(*qubit, *clbit, rng).map(|_| ()),
            Op::MeasureAll => {
                for q in 0..self.n_qubits {
                    self.measure(q, q, rng)?;
                }
                Ok(())
            }
        }
    }

    /// Runs every op of the circuit in order.
    pub fn run<R: Rng + ?Sized>(&mut self, circuit: &Circuit, rng: &mut R) -> Result<()> {
        circuit.ops().iter().try_for_each(|op| self.execute(op, rng))
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let cdf = self.cdf();
        draw_from_cdf(rng, &cdf)
    }

    fn cdf(&self) -> Vec<f64> {
        self.amplitudes
            .iter()
            .scan(0.0, |acc, a| {
                *acc += a.norm_sqr();
                Some(*acc)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct SvOptions {
    pub guard: Option<MemoryGuard>,
    /// Worker threads for shot-level parallelism; `None` uses rayon's global pool.
    pub threads: Option<usize>,
}

impl SvOptions {
    fn guard(&self) -> MemoryGuard {
        self.guard.unwrap_or_default()
    }
}

/// Final state of a circuit without mid-circuit measurement; terminal
/// measurements are skipped.
pub fn final_state(circuit: &Circuit, guard: &MemoryGuard) -> Result<StateVector> {
    if circuit.has_mid_circuit_measurement() {
        return Err(Error::InvalidCircuit(
            "circuit contains mid-circuit measurement or classical conditions".into(),
        ));
    }
    let mut state = StateVector::new(circuit.n_qubits(), guard)?;
    for g in circuit.gates() {
        state.apply(g)?;
    }
    Ok(state)
}

/// Exact outcome probabilities indexed by basis state.
pub fn probabilities(circuit: &Circuit, guard: &MemoryGuard) -> Result<Vec<f64>> {
    Ok(final_state(circuit, guard)?.probabilities())
}

/// Samples `shots` full-register outcomes.
///
/// Without mid-circuit measurement the state is prepared once; otherwise the
/// whole circuit is re-executed for every shot.
pub fn sample(circuit: &Circuit, shots: u64, seed: u64, opts: &SvOptions) -> Result<SampleResult> {
    let guard = opts.guard();
    let n = circuit.n_qubits();
    let outcomes = if circuit.has_mid_circuit_measurement() {
        guard.check_state_vector(n)?;
        run_shots(shots, opts.threads, |shot| {
            let mut rng = shot_rng(seed, shot);
            let mut state = StateVector::new(n, &guard)?;
            state.run(circuit, &mut rng)?;
            Ok(index_key(state.sample_index(&mut rng) as u128, n))
        })?
    } else {
        let state = final_state(circuit, &guard)?;
        debug_assert!((state.norm_sqr() - 1.0).abs() < NORM_TOL);
        let cdf = state.cdf();
        run_shots(shots, opts.threads, |shot| {
            let mut rng = shot_rng(seed, shot);
            Ok(index_key(draw_from_cdf(&mut rng, &cdf) as u128, n))
        })?
    };
    Ok(SampleResult::from_outcomes(outcomes, shots, seed))
}
