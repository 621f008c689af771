//! Matrix-product-state simulation with SVD truncation.
//!
//! Site `i` is a `(χ_left, 2, χ_right)` tensor; boundary bonds have extent 1.
//! The chain is kept in mixed canonical form around a movable orthogonality
//! centre: sites left of it are left-isometric, sites right of it are
//! right-isometric. A two-qubit gate on sites `(i, i+1)` first moves the centre
//! onto one of them, so the norm of the merged two-site tensor equals the norm
//! of the state and truncation is locally optimal. After the split the
//! singular values are absorbed into the right factor and the centre sits on
//! site `i + 1`.
//!
//! Non-adjacent gates are routed with SWAPs that bring the far qubit next to
//! the near one and then take it back again.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bench::{mps_parameter_bound, MemoryGuard};
use crate::circuit::{swap_qubit_roles, Circuit, Gate, GateKind, Op};
use crate::error::{Error, Result};
use crate::sampling::{bits_key, draw_bit, run_shots, shot_rng, SampleResult};
use crate::sv::StateVector;
use crate::tensor::{matmul_raw, qr, svd_truncate, ComplexTensor, TruncationConfig, C64, ONE, ZERO};

pub const SNAPSHOT_FORMAT: &str = "qcsim-mps";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Wall-clock seconds spent in each simulation phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimers {
    pub gate_apply_s: f64,
    pub svd_s: f64,
    pub sampling_s: f64,
}

impl PhaseTimers {
    pub fn merge(&mut self, other: &PhaseTimers) {
        self.gate_apply_s += other.gate_apply_s;
        self.svd_s += other.svd_s;
        self.sampling_s += other.sampling_s;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MpsStats {
    pub svd_calls: u64,
    pub cumulative_discarded_weight: f64,
    pub max_bond_reached: usize,
    pub swap_gates_inserted: u64,
    /// Splits where the bond cap cut off singular values the cutoffs would have kept.
    pub capped_splits: u64,
    pub timers: PhaseTimers,
}

impl MpsStats {
    pub fn merge(&mut self, other: &MpsStats) {
        self.svd_calls += other.svd_calls;
        self.cumulative_discarded_weight += other.cumulative_discarded_weight;
        self.max_bond_reached = self.max_bond_reached.max(other.max_bond_reached);
        self.swap_gates_inserted += other.swap_gates_inserted;
        self.capped_splits += other.capped_splits;
        self.timers.merge(&other.timers);
    }
}

/// Element counts of the site tensors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCount {
    /// `Σ χ_left · 2 · χ_right` over all sites.
    pub exact: u128,
    /// `2 · n · χ_max²` for the configured bond cap.
    pub bound: u128,
}

#[derive(Clone, Debug)]
pub struct MpsState {
    n_qubits: usize,
    sites: Vec<ComplexTensor>,
    center: usize,
    cfg: TruncationConfig,
    classical_bits: Vec<Option<bool>>,
    stats: MpsStats,
}

#[inline]
fn site_dims(t: &ComplexTensor) -> (usize, usize) {
    (t.shape()[0], t.shape()[2])
}

impl MpsState {
    /// Product state `|0…0⟩` with every bond of extent 1.
    pub fn new(n_qubits: usize, cfg: TruncationConfig) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("MPS needs at least one qubit".into()));
        }
        cfg.validate()?;
        let site = ComplexTensor::new(vec![1, 2, 1], vec![ONE, ZERO])?;
        Ok(Self {
            n_qubits,
            sites: vec![site; n_qubits],
            center: 0,
            cfg,
            classical_bits: Vec::new(),
            stats: MpsStats {
                max_bond_reached: 1,
                ..MpsStats::default()
            },
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn config(&self) -> &TruncationConfig {
        &self.cfg
    }

    pub fn sites(&self) -> &[ComplexTensor] {
        &self.sites
    }

    pub fn stats(&self) -> &MpsStats {
        &self.stats
    }

    pub fn take_stats(&mut self) -> MpsStats {
        std::mem::take(&mut self.stats)
    }

    pub fn center(&self) -> usize {
        self.center
    }

    /// Extents of all `n + 1` bonds, boundaries included.
    pub fn bond_dims(&self) -> Vec<usize> {
        std::iter::once(1)
            .chain(self.sites.iter().map(|s| site_dims(s).1))
            .collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn classical_bit(&self, bit: usize) -> Option<bool> {
        self.classical_bits.get(bit).copied().flatten()
    }

    fn set_classical_bit(&mut self, bit: usize, value: bool) {
        if self.classical_bits.len() <= bit {
            self.classical_bits.resize(bit + 1, None);
        }
        self.classical_bits[bit] = Some(value);
    }

    pub fn param_count(&self) -> ParamCount {
        ParamCount {
            exact: self.sites.iter().map(|s| s.len() as u128).sum(),
            bound: mps_parameter_bound(self.n_qubits, self.cfg.max_bond),
        }
    }

    /// `⟨ψ|ψ⟩` by contracting the chain with its conjugate.
    pub fn norm_sqr(&self) -> f64 {
        let mut env = vec![ONE];
        let mut dim = 1usize;
        for site in &self.sites {
            let (l, r) = site_dims(site);
            debug_assert_eq!(l, dim);
            // t[a', s, b] = Σ_a env[a, a'] A[a, s, b], then new[b, b'] = Σ conj(A[a',s,b']) t[a',s,b]
            let a = site.data();
            let mut next = vec![ZERO; r * r];
            for s in 0..2 {
                for ap in 0..l {
                    for b in 0..r {
                        let t: C64 = (0..l).map(|x| env[x * l + ap] * a[(x * 2 + s) * r + b]).sum();
                        if t == ZERO {
                            continue;
                        }
                        for bp in 0..r {
                            next[b * r + bp] += t * a[(ap * 2 + s) * r + bp].conj();
                        }
                    }
                }
            }
            env = next;
            dim = r;
        }
        env[0].re
    }

    pub fn apply_1q(&mut self, m: &[C64], q: usize) {
        let start = Instant::now();
        let site = &mut self.sites[q];
        let (l, r) = site_dims(site);
        let data = site.data_mut();
        for a in 0..l {
            for b in 0..r {
                let i0 = (a * 2) * r + b;
                let i1 = (a * 2 + 1) * r + b;
                let (x0, x1) = (data[i0], data[i1]);
                data[i0] = m[0] * x0 + m[1] * x1;
                data[i1] = m[2] * x0 + m[3] * x1;
            }
        }
        self.stats.timers.gate_apply_s += start.elapsed().as_secs_f64();
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
            &[q] => {
                self.apply_1q(&m, q);
                Ok(())
            }
            &[a, b] => self.apply_2q(&m, a, b),
            _ => unreachable!("validated arity"),
        }
    }

    /// Applies a 4×4 unitary (first target = more significant bit) to qubits
    /// `a` and `b`, routing with SWAPs when they are not neighbours.
    pub fn apply_2q(&mut self, m: &[C64], a: usize, b: usize) -> Result<()> {
        let (lo, hi) = (a.min(b), a.max(b));
        let oriented = |first_is_lo: bool| {
            if first_is_lo {
                m.to_vec()
            } else {
                swap_qubit_roles(m)
            }
        };
        if hi == lo + 1 {
            return self.apply_adjacent(&oriented(a == lo), lo);
        }
        let swap = GateKind::Swap.matrix();
        for p in (lo + 1..hi).rev() {
            self.apply_adjacent(&swap, p)?;
            self.stats.swap_gates_inserted += 1;
        }
        self.apply_adjacent(&oriented(a == lo), lo)?;
        for p in lo + 1..hi {
            self.apply_adjacent(&swap, p)?;
            self.stats.swap_gates_inserted += 1;
        }
        Ok(())
    }

    /// Two-site update on `(i, i + 1)`.
    fn apply_adjacent(&mut self, m: &[C64], i: usize) -> Result<()> {
        let start = Instant::now();
        if self.center <= i {
            self.move_center(i)?;
        } else {
            self.move_center(i + 1)?;
        }
        let (l, mid) = site_dims(&self.sites[i]);
        let (_, r) = site_dims(&self.sites[i + 1]);

        // theta[(a, s1), (s2, c)]
        let mut theta = matmul_raw(self.sites[i].data(), self.sites[i + 1].data(), l * 2, mid, 2 * r);
        for a in 0..l {
            for c in 0..r {
                let idx = |s1: usize, s2: usize| (a * 2 + s1) * (2 * r) + s2 * r + c;
                let v = [theta[idx(0, 0)], theta[idx(0, 1)], theta[idx(1, 0)], theta[idx(1, 1)]];
                for row in 0..4 {
                    theta[idx(row >> 1, row & 1)] = (0..4).map(|col| m[row * 4 + col] * v[col]).sum();
                }
            }
        }
        let theta = ComplexTensor::matrix(l * 2, 2 * r, theta)?;

        let svd_start = Instant::now();
        let split = svd_truncate(&theta, &self.cfg)?;
        let svd_time = svd_start.elapsed().as_secs_f64();
        self.stats.svd_calls += 1;

        let k = split.kept_rank;
        let kept_norm = split.s.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(kept_norm > 0.0) {
            return Err(Error::Numeric("two-site tensor vanished during truncation".into()));
        }
        let mut right = split.v.into_data();
        for (row, sv) in split.s.iter().enumerate() {
            let scale = sv / kept_norm;
            for x in &mut right[row * 2 * r..(row + 1) * 2 * r] {
                *x *= scale;
            }
        }
        self.sites[i] = split.u.reshape(vec![l, 2, k])?;
        self.sites[i + 1] = ComplexTensor::new(vec![k, 2, r], right)?;
        self.center = i + 1;

        self.stats.cumulative_discarded_weight += split.discarded_weight;
        if split.cap_limited {
            self.stats.capped_splits += 1;
        }
        self.stats.max_bond_reached = self.stats.max_bond_reached.max(k);
        self.stats.timers.svd_s += svd_time;
        self.stats.timers.gate_apply_s += start.elapsed().as_secs_f64() - svd_time;
        Ok(())
    }

    /// Moves the orthogonality centre to `target` with QR (rightward) or LQ
    /// (leftward) steps.
    fn move_center(&mut self, target: usize) -> Result<()> {
        while self.center < target {
            let c = self.center;
            let (l, r) = site_dims(&self.sites[c]);
            let mat = ComplexTensor::matrix(l * 2, r, self.sites[c].data().to_vec())?;
            let (q, rr) = qr(&mat)?;
            let k = q.cols();
            let (_, r2) = site_dims(&self.sites[c + 1]);
            let next = matmul_raw(rr.data(), self.sites[c + 1].data(), k, r, 2 * r2);
            self.sites[c] = q.reshape(vec![l, 2, k])?;
            self.sites[c + 1] = ComplexTensor::new(vec![k, 2, r2], next)?;
            self.center += 1;
        }
        while self.center > target {
            let c = self.center;
            let (l, r) = site_dims(&self.sites[c]);
            let mat = ComplexTensor::matrix(l, 2 * r, self.sites[c].data().to_vec())?;
            // mat† = q r  =>  mat = r† q†
            let (q, rr) = qr(&mat.adjoint()?)?;
            let k = q.cols();
            let lower = rr.adjoint()?; // l × k
            let upper = q.adjoint()?; // k × 2r
            let (l0, _) = site_dims(&self.sites[c - 1]);
            let prev = matmul_raw(self.sites[c - 1].data(), lower.data(), l0 * 2, l, k);
            self.sites[c] = upper.reshape(vec![k, 2, r])?;
            self.sites[c - 1] = ComplexTensor::new(vec![l0, 2, k], prev)?;
            self.center -= 1;
        }
        Ok(())
    }

    /// Projective measurement of `qubit`, recorded in `clbit`.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubit: usize, clbit: usize, rng: &mut R) -> Result<bool> {
        if qubit >= self.n_qubits {
            return Err(Error::InvalidArgument(format!("qubit {qubit} out of range")));
        }
        let start = Instant::now();
        self.move_center(qubit)?;
        let site = &mut self.sites[qubit];
        let (l, r) = site_dims(site);
        let mut weights = [0.0f64; 2];
        for a in 0..l {
            for (s, w) in weights.iter_mut().enumerate() {
                let off = (a * 2 + s) * r;
                *w += site.data()[off..off + r].iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        let outcome = draw_bit(rng, weights[0], weights[1]);
        let keep = usize::from(outcome);
        let scale = 1.0 / weights[keep].sqrt();
        let data = site.data_mut();
        for a in 0..l {
            for s in 0..2 {
                let off = (a * 2 + s) * r;
                for z in &mut data[off..off + r] {
                    *z = if s == keep { *z * scale } else { ZERO };
                }
            }
        }
        self.set_classical_bit(clbit, outcome);
        self.stats.timers.gate_apply_s += start.elapsed().as_secs_f64();
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

    pub fn run<R: Rng + ?Sized>(&mut self, circuit: &Circuit, rng: &mut R) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "circuit has {} qubits, state has {}",
                circuit.n_qubits(),
                self.n_qubits
            )));
        }
        circuit.ops().iter().try_for_each(|op| self.execute(op, rng))
    }

    /// Right environments `E_i = Σ_s A_i[s] E_{i+1} A_i[s]†`, with `E_n = [1]`.
    /// `E_i` has extent `χ_left(i) × χ_left(i)`.
    pub fn right_environments(&self) -> Vec<Vec<C64>> {
        let mut envs = vec![Vec::new(); self.n_qubits + 1];
        envs[self.n_qubits] = vec![ONE];
        for i in (0..self.n_qubits).rev() {
            let site = &self.sites[i];
            let (l, r) = site_dims(site);
            let a = site.data();
            // t[(a, s), b'] = Σ_b A[a, s, b] E[b, b']
            let t = matmul_raw(a, &envs[i + 1], l * 2, r, r);
            let mut env = vec![ZERO; l * l];
            for x in 0..l {
                for y in 0..l {
                    let mut acc = ZERO;
                    for s in 0..2 {
                        let tr = &t[(x * 2 + s) * r..(x * 2 + s + 1) * r];
                        let ar = &a[(y * 2 + s) * r..(y * 2 + s + 1) * r];
                        acc += tr.iter().zip(ar).map(|(p, q)| p * q.conj()).sum::<C64>();
                    }
                    env[x * l + y] = acc;
                }
            }
            envs[i] = env;
        }
        envs
    }

    /// Draws one full-register outcome by sampling qubits left to right.
    /// Costs `O(n χ²)` given precomputed right environments.
    pub fn sample_bits<R: Rng + ?Sized>(&self, envs: &[Vec<C64>], rng: &mut R) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.n_qubits);
        let mut left = vec![ONE];
        for (i, site) in self.sites.iter().enumerate() {
            let (l, r) = site_dims(site);
            let a = site.data();
            let env = &envs[i + 1];
            let mut cand: [Vec<C64>; 2] = [vec![ZERO; r], vec![ZERO; r]];
            let mut weight = [0.0f64; 2];
            for s in 0..2 {
                let v = &mut cand[s];
                for (x, &lx) in left.iter().enumerate().take(l) {
                    if lx == ZERO {
                        continue;
                    }
                    let row = &a[(x * 2 + s) * r..(x * 2 + s + 1) * r];
                    for (vb, &ab) in v.iter_mut().zip(row) {
                        *vb += lx * ab;
                    }
                }
                let mut w = ZERO;
                for b in 0..r {
                    if v[b] == ZERO {
                        continue;
                    }
                    let erow = &env[b * r..(b + 1) * r];
                    let inner: C64 = erow.iter().zip(v.iter()).map(|(e, y)| e * y.conj()).sum();
                    w += v[b] * inner;
                }
                weight[s] = w.re.max(0.0);
            }
            let bit = draw_bit(rng, weight[0], weight[1]);
            let s = usize::from(bit);
            let norm = weight[s].sqrt();
            left = std::mem::take(&mut cand[s]);
            if norm > 0.0 {
                left.iter_mut().for_each(|z| *z /= norm);
            }
            bits.push(bit);
        }
        bits
    }

    /// Dense amplitudes of the represented state.
    pub fn to_statevector(&self, guard: &MemoryGuard) -> Result<StateVector> {
        guard.check_state_vector(self.n_qubits)?;
        let mut psi = vec![ONE];
        let mut rows = 1usize;
        for site in &self.sites {
            let (l, r) = site_dims(site);
            let mut next = vec![ZERO; rows * 2 * r];
            for s in 0..2 {
                // A[:, s, :] as an l × r matrix.
                let slice: Vec<C64> = (0..l)
                    .flat_map(|x| site.data()[(x * 2 + s) * r..(x * 2 + s + 1) * r].iter().copied())
                    .collect();
                let block = matmul_raw(&psi, &slice, rows, l, r);
                next[s * rows * r..(s + 1) * rows * r].copy_from_slice(&block);
            }
            psi = next;
            rows *= 2;
        }
        let mut sv = StateVector::from_amplitudes(psi)?;
        for (bit, v) in self.classical_bits.iter().enumerate() {
            if let Some(v) = v {
                sv.set_classical_bit(bit, *v);
            }
        }
        Ok(sv)
    }

    pub fn snapshot(&self) -> MpsSnapshot {
        MpsSnapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            n_qubits: self.n_qubits,
            center: self.center,
            bonds: self.bond_dims(),
            truncation: self.cfg,
            classical_bits: self.classical_bits.clone(),
            sites: self
                .sites
                .iter()
                .map(|s| SiteRecord {
                    shape: [s.shape()[0], s.shape()[1], s.shape()[2]],
                    data: s.data().iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }

    pub fn from_snapshot(snap: MpsSnapshot) -> Result<Self> {
        if snap.format != SNAPSHOT_FORMAT {
            return Err(Error::InvalidArgument(format!("unknown snapshot format '{}'", snap.format)));
        }
        if snap.version != SNAPSHOT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported snapshot version {} (expected {SNAPSHOT_VERSION})",
                snap.version
            )));
        }
        if snap.sites.len() != snap.n_qubits || snap.n_qubits == 0 || snap.center >= snap.n_qubits {
            return Err(Error::Shape("snapshot site list does not match n_qubits".into()));
        }
        let mut sites = Vec::with_capacity(snap.n_qubits);
        let mut prev = 1usize;
        for rec in snap.sites {
            let [l, d, r] = rec.shape;
            if l != prev || d != 2 {
                return Err(Error::Shape(format!("site shape {:?} breaks the chain", rec.shape)));
            }
            let data = rec.data.into_iter().map(|[re, im]| C64::new(re, im)).collect();
            sites.push(ComplexTensor::new(vec![l, d, r], data)?);
            prev = r;
        }
        if prev != 1 {
            return Err(Error::Shape("right boundary bond must have extent 1".into()));
        }
        snap.truncation.validate()?;
        let max_bond = sites.iter().map(|s| site_dims(s).1).max().unwrap_or(1);
        Ok(Self {
            n_qubits: snap.n_qubits,
            sites,
            center: snap.center,
            cfg: snap.truncation,
            classical_bits: snap.classical_bits,
            stats: MpsStats {
                max_bond_reached: max_bond,
                ..MpsStats::default()
            },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.snapshot())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_snapshot(serde_json::from_str(text)?)
    }
}

/// Versioned debugging container for an [`MpsState`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpsSnapshot {
    pub format: String,
    pub version: u32,
    pub n_qubits: usize,
    pub center: usize,
    pub bonds: Vec<usize>,
    pub truncation: TruncationConfig,
    pub classical_bits: Vec<Option<bool>>,
    pub sites: Vec<SiteRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub shape: [usize; 3],
    /// Row-major `(re, im)` pairs.
    pub data: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Default)]
pub struct MpsOptions {
    /// Worker threads for shot-level parallelism; `None` uses rayon's global pool.
    pub threads: Option<usize>,
}

/// Runs the gates of a circuit without mid-circuit measurement.
pub fn final_state(circuit: &Circuit, cfg: TruncationConfig) -> Result<MpsState> {
    if circuit.has_mid_circuit_measurement() {
        return Err(Error::InvalidCircuit(
            "circuit contains mid-circuit measurement or classical conditions".into(),
        ));
    }
    let mut state = MpsState::new(circuit.n_qubits(), cfg)?;
    for g in circuit.gates() {
        state.apply(g)?;
    }
    Ok(state)
}

/// Samples `shots` full-register outcomes.
///
/// Without mid-circuit measurement the MPS is built once and every shot is
/// drawn from it; otherwise the circuit is re-executed per shot. Stats are
/// summed over all executions.
pub fn sample(
    circuit: &Circuit,
    shots: u64,
    cfg: TruncationConfig,
    seed: u64,
    opts: &MpsOptions,
) -> Result<(SampleResult, MpsStats)> {
    cfg.validate()?;
    let n = circuit.n_qubits();
    if circuit.has_mid_circuit_measurement() {
        let per_shot = run_shots(shots, opts.threads, |shot| {
            let mut rng = shot_rng(seed, shot);
            let mut state = MpsState::new(n, cfg)?;
            state.run(circuit, &mut rng)?;
            let start = Instant::now();
            let envs = state.right_environments();
            let bits = state.sample_bits(&envs, &mut rng);
            let mut stats = state.take_stats();
            stats.timers.sampling_s += start.elapsed().as_secs_f64();
            Ok((bits_key(&bits), stats))
        })?;
        let mut stats = MpsStats {
            max_bond_reached: 1,
            ..MpsStats::default()
        };
        let mut keys = Vec::with_capacity(per_shot.len());
        for (key, s) in per_shot {
            stats.merge(&s);
            keys.push(key);
        }
        Ok((SampleResult::from_outcomes(keys, shots, seed), stats))
    } else {
        let mut state = final_state(circuit, cfg)?;
        let start = Instant::now();
        let envs = state.right_environments();
        let keys = run_shots(shots, opts.threads, |shot| {
            let mut rng = shot_rng(seed, shot);
            Ok(bits_key(&state.sample_bits(&envs, &mut rng)))
        })?;
        let mut stats = state.take_stats();
        stats.timers.sampling_s += start.elapsed().as_secs_f64();
        Ok((SampleResult::from_outcomes(keys, shots, seed), stats))
    }
}

/// Exact outcome distribution of the MPS produced by a measurement-free circuit.
pub fn probabilities(circuit: &Circuit, cfg: TruncationConfig, guard: &MemoryGuard) -> Result<Vec<f64>> {
    Ok(final_state(circuit, cfg)?.to_statevector(guard)?.probabilities())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ghz, build_quantum_volume};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn guard() -> MemoryGuard {
        MemoryGuard::new(1 << 30)
    }

    fn amps(state: &MpsState) -> Vec<C64> {
        state.to_statevector(&guard()).unwrap().amplitudes().to_vec()
    }

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn initial_state() {
        let s = MpsState::new(5, TruncationConfig::default()).unwrap();
        assert_eq!(s.bond_dims(), vec![1; 6]);
        assert_eq!(s.param_count().exact, 10);
        assert_eq!(s.param_count().bound, 2 * 5 * 64 * 64);
        let a = amps(&s);
        assert_eq!(a[0], ONE);
        assert!(a[1..].iter().all(|z| *z == ZERO));
        assert!(MpsState::new(0, TruncationConfig::default()).is_err());
    }

    #[test]
    fn single_qubit_gates() {
        let mut s = MpsState::new(3, TruncationConfig::default()).unwrap();
        s.apply(&Gate::new(GateKind::H, vec![0])).unwrap();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(&amps(&s), &[h, h, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO], 1e-14));

        let mut s = MpsState::new(2, TruncationConfig::default()).unwrap();
        s.apply(&Gate::new(GateKind::X, vec![1])).unwrap();
        assert!(close(&amps(&s), &[ZERO, ZERO, ONE, ZERO], 0.0));
        s.apply(&Gate::new(GateKind::X, vec![1])).unwrap();
        assert!(close(&amps(&s), &[ONE, ZERO, ZERO, ZERO], 0.0));
    }

    #[test]
    fn bell_pair_has_bond_two() {
        let mut s = MpsState::new(2, TruncationConfig::default()).unwrap();
        s.apply(&Gate::new(GateKind::H, vec![0])).unwrap();
        s.apply(&Gate::new(GateKind::Cx, vec![0, 1])).unwrap();
        assert_eq!(s.bond_dims(), vec![1, 2, 1]);
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(&amps(&s), &[h, ZERO, ZERO, h], 1e-12));
        assert_eq!(s.stats().svd_calls, 1);
        assert_eq!(s.stats().cumulative_discarded_weight, 0.0);
    }

    #[test]
    fn ghz_bonds_stay_two() {
        let s = final_state(&build_ghz(20).unwrap(), TruncationConfig::default()).unwrap();
        let bonds = s.bond_dims();
        assert_eq!(bonds[0], 1);
        assert_eq!(bonds[20], 1);
        assert!(bonds[1..20].iter().all(|&b| b == 2));
        assert_eq!(s.stats().max_bond_reached, 2);
        assert_eq!(s.param_count().exact, (2 * 2 + 18 * 8 + 2 * 2) as u128);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distant_gate_routes_with_swaps() {
        let mut c = Circuit::new(4).unwrap();
        c.gate(GateKind::H, &[0]).unwrap();
        c.gate(GateKind::Ry(0.7), &[2]).unwrap();
        c.gate(GateKind::Cx, &[0, 3]).unwrap();
        c.gate(GateKind::Cp(0.4), &[3, 1]).unwrap();
        let s = final_state(&c, TruncationConfig::exact()).unwrap();
        assert_eq!(s.stats().swap_gates_inserted, 4 + 2);
        let reference = crate::sv::final_state(&c, &guard()).unwrap();
        assert!(close(&amps(&s), reference.amplitudes(), 1e-12));
    }

    #[test]
    fn exact_mode_matches_statevector() {
        let c = build_quantum_volume(6, 3).unwrap();
        let s = final_state(&c, TruncationConfig::exact()).unwrap();
        let reference = crate::sv::final_state(&c, &guard()).unwrap();
        assert!(close(&amps(&s), reference.amplitudes(), 1e-10));
        assert!(s.max_bond() <= 8);
    }

    #[test]
    fn measurement_collapses() {
        let mut s = final_state(&build_ghz(6).unwrap(), TruncationConfig::default()).unwrap();
        let mut rng = shot_rng(5, 0);
        let bit = s.measure(3, 0, &mut rng).unwrap();
        assert_eq!(s.classical_bit(0), Some(bit));
        let a = amps(&s);
        let idx = if bit { 63 } else { 0 };
        assert!((a[idx].norm() - 1.0).abs() < 1e-12);
        for q in 0..6 {
            assert_eq!(s.measure(q, q + 1, &mut rng).unwrap(), bit);
        }
    }

    #[test]
    fn sampling_matches_distribution() {
        let c = build_quantum_volume(6, 11).unwrap();
        let s = final_state(&c, TruncationConfig::exact()).unwrap();
        let envs = s.right_environments();
        assert!((envs[0][0].re - 1.0).abs() < 1e-10);
        let probs = crate::sv::probabilities(&c, &guard()).unwrap();
        let shots = 40_000u64;
        let mut counts = vec![0u64; 64];
        for shot in 0..shots {
            let bits = s.sample_bits(&envs, &mut shot_rng(1, shot));
            let idx: usize = bits.iter().enumerate().map(|(q, &b)| usize::from(b) << q).sum();
            counts[idx] += 1;
        }
        for (p, n) in probs.iter().zip(&counts) {
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            assert!((*n as f64 / shots as f64 - p).abs() <= 5.0 * sigma + 1e-9);
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let mut c = build_quantum_volume(4, 2).unwrap();
        c.measure(1, 0).unwrap();
        let mut s = MpsState::new(4, TruncationConfig::default()).unwrap();
        s.run(&c, &mut shot_rng(9, 0)).unwrap();
        let text = s.to_json().unwrap();
        let back = MpsState::from_json(&text).unwrap();
        assert_eq!(back.snapshot(), s.snapshot());
        assert_eq!(back.classical_bit(0), s.classical_bit(0));

        let mut bad = s.snapshot();
        bad.version = 99;
        assert!(MpsState::from_snapshot(bad).is_err());
        let mut bad = s.snapshot();
        bad.sites[1].shape[0] += 1;
        assert!(MpsState::from_snapshot(bad).is_err());
    }

    #[test]
    fn sampling_is_thread_count_independent() {
        let c = build_quantum_volume(6, 4).unwrap();
        let cfg = TruncationConfig::default();
        let one = sample(&c, 500, cfg, 3, &MpsOptions { threads: Some(1) }).unwrap().0;
        let four = sample(&c, 500, cfg, 3, &MpsOptions { threads: Some(4) }).unwrap().0;
        assert_eq!(one, four);
    }
}
