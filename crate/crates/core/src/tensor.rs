//! Dense complex tensors and the linear algebra both simulators are built on.
//!
//! Storage is row-major. Matrices are rank-2 tensors; the SVD and QR kernels
//! only accept those and report a [`Error::Shape`] otherwise.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Maximum number of Jacobi sweeps before the SVD is declared non-convergent.
const MAX_SWEEPS: usize = 80;
/// Relative off-diagonal tolerance for the one-sided Jacobi rotations.
const JACOBI_TOL: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl ComplexTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.iter().any(|&d| d == 0) {
            return Err(Error::Shape(format!("zero extent in shape {shape:?}")));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {len} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![ZERO; len],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(vec![n, n]);
        for i in 0..n {
            t.data[i * n + i] = ONE;
        }
        t
    }

    /// Builds a `rows × cols` matrix from row-major values.
    pub fn matrix(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.shape.len()];
        for i in (0..self.shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.shape[i + 1];
        }
        strides
    }

    pub fn get(&self, index: &[usize]) -> C64 {
        let offset: usize = index
            .iter()
            .zip(self.strides())
            .map(|(i, s)| i * s)
            .sum();
        self.data[offset]
    }

    /// Reinterprets the row-major data under a new shape without moving it.
    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    /// Reorders axes so that axis `k` of the result is axis `axes[k]` of `self`.
    pub fn permute(&self, axes: &[usize]) -> Result<Self> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if axes.len() != rank || axes.iter().any(|&a| a >= rank || std::mem::replace(&mut seen[a], true)) {
            return Err(Error::Shape(format!(
                "{axes:?} is not a permutation of {rank} axes"
            )));
        }
        if axes.iter().enumerate().all(|(i, &a)| i == a) {
            return Ok(self.clone());
        }
        let src_strides = self.strides();
        let shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let strides: Vec<usize> = axes.iter().map(|&a| src_strides[a]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut index = vec![0usize; rank];
        let mut offset = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[offset]);
            for k in (0..rank).rev() {
                index[k] += 1;
                offset += strides[k];
                if index[k] < shape[k] {
                    break;
                }
                offset -= strides[k] * shape[k];
                index[k] = 0;
            }
        }
        Ok(Self { shape, data })
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&z| z * alpha).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn require_matrix(&self, what: &str) -> Result<()> {
        if self.rank() != 2 {
            return Err(Error::Shape(format!(
                "{what} expects a matrix, got shape {:?}",
                self.shape
            )));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.require_matrix("matmul")?;
        other.require_matrix("matmul")?;
        let (m, k) = (self.rows(), self.cols());
        let (k2, n) = (other.rows(), other.cols());
        if k != k2 {
            return Err(Error::Shape(format!(
                "cannot multiply {m}x{k} by {k2}x{n}"
            )));
        }
        Ok(Self {
            shape: vec![m, n],
            data: matmul_raw(&self.data, &other.data, m, k, n),
        })
    }

    /// Conjugate transpose of a matrix.
    pub fn adjoint(&self) -> Result<Self> {
        self.require_matrix("adjoint")?;
        let (m, n) = (self.rows(), self.cols());
        let mut data = vec![ZERO; m * n];
        for i in 0..m {
            for j in 0..n {
                data[j * m + i] = self.data[i * n + j].conj();
            }
        }
        Ok(Self {
            shape: vec![n, m],
            data,
        })
    }

    /// Largest element-wise modulus difference; shapes must agree.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn matmul_raw(a: &[C64], b: &[C64], m: usize, k: usize, n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == ZERO {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in row.iter_mut().zip(brow) {
                *o += aip * bv;
            }
        }
    }
    out
}

/// Contracts `a` and `b` over the given `(axis of a, axis of b)` pairs.
///
/// The result carries the free axes of `a` in order, followed by the free axes
/// of `b` in order. Contracting every axis yields a rank-0 tensor.
pub fn contract(
    a: &ComplexTensor,
    b: &ComplexTensor,
    paired_axes: &[(usize, usize)],
) -> Result<ComplexTensor> {
    let mut used_a = vec![false; a.rank()];
    let mut used_b = vec![false; b.rank()];
    for &(ia, ib) in paired_axes {
        if ia >= a.rank() || ib >= b.rank() {
            return Err(Error::Shape(format!(
                "axis pair ({ia}, {ib}) out of range for ranks {} and {}",
                a.rank(),
                b.rank()
            )));
        }
        if std::mem::replace(&mut used_a[ia], true) || std::mem::replace(&mut used_b[ib], true) {
            return Err(Error::Shape(format!("axis pair ({ia}, {ib}) reuses an axis")));
        }
        if a.shape[ia] != b.shape[ib] {
            return Err(Error::Shape(format!(
                "extent mismatch on paired axes ({ia}, {ib}): {} vs {}",
                a.shape[ia], b.shape[ib]
            )));
        }
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|&i| !used_a[i]).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|&i| !used_b[i]).collect();

    let perm_a: Vec<usize> = free_a
        .iter()
        .copied()
        .chain(paired_axes.iter().map(|p| p.0))
        .collect();
    let perm_b: Vec<usize> = paired_axes
        .iter()
        .map(|p| p.1)
        .chain(free_b.iter().copied())
        .collect();

    let rows: usize = free_a.iter().map(|&i| a.shape[i]).product();
    let inner: usize = paired_axes.iter().map(|p| a.shape[p.0]).product();
    let cols: usize = free_b.iter().map(|&i| b.shape[i]).product();

    let ap = a.permute(&perm_a)?;
    let bp = b.permute(&perm_b)?;
    let data = matmul_raw(&ap.data, &bp.data, rows, inner, cols);
    let shape = free_a
        .iter()
        .map(|&i| a.shape[i])
        .chain(free_b.iter().map(|&i| b.shape[i]))
        .collect();
    ComplexTensor::new(shape, data)
}

/// Controls which singular values survive a split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub max_bond: usize,
    pub abs_cutoff: f64,
    pub rel_cutoff: f64,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            max_bond: 64,
            abs_cutoff: 1e-5,
            rel_cutoff: 1e-5,
        }
    }
}

impl TruncationConfig {
    pub fn new(max_bond: usize, abs_cutoff: f64, rel_cutoff: f64) -> Result<Self> {
        let cfg = Self {
            max_bond,
            abs_cutoff,
            rel_cutoff,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// No bond cap and zero cutoffs: the MPS stays an exact representation.
    pub fn exact() -> Self {
        Self {
            max_bond: usize::MAX,
            abs_cutoff: 0.0,
            rel_cutoff: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_bond == 0 {
            return Err(Error::InvalidArgument("max_bond must be positive".into()));
        }
        if !(self.abs_cutoff >= 0.0) || !self.abs_cutoff.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "abs_cutoff must be a non-negative real, got {}",
                self.abs_cutoff
            )));
        }
        if !(0.0..1.0).contains(&self.rel_cutoff) {
            return Err(Error::InvalidArgument(format!(
                "rel_cutoff must lie in [0, 1), got {}",
                self.rel_cutoff
            )));
        }
        Ok(())
    }

    pub fn with_max_bond(self, max_bond: usize) -> Self {
        Self { max_bond, ..self }
    }
}

/// Thin SVD `m = u · diag(s) · v`; the rows of `v` are conjugated right singular vectors.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexTensor,
    pub s: Vec<f64>,
    pub v: ComplexTensor,
}

#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub u: ComplexTensor,
    pub s: Vec<f64>,
    pub v: ComplexTensor,
    pub kept_rank: usize,
    /// Sum of squares of the dropped singular values.
    pub discarded_weight: f64,
    /// The `max_bond` cap removed values that the cutoffs alone would have kept.
    pub cap_limited: bool,
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations. Singular values come
/// back in descending order.
pub fn svd(m: &ComplexTensor) -> Result<Svd> {
    m.require_matrix("svd")?;
    let (rows, cols) = (m.rows(), m.cols());
    if rows >= cols {
        let (u, s, v) = jacobi_tall(&m.data, rows, cols)?;
        Ok(Svd { u, s, v })
    } else {
        // m† = u s v  =>  m = v† s u†
        let adj = m.adjoint()?;
        let (u, s, v) = jacobi_tall(&adj.data, cols, rows)?;
        Ok(Svd {
            u: v.adjoint()?,
            s,
            v: u.adjoint()?,
        })
    }
}

/// `a` is row-major `m × n` with `m ≥ n`. Returns `(u: m×n, s, v: n×n)` where
/// `v` is already the adjoint of the accumulated rotation.
fn jacobi_tall(a: &[C64], m: usize, n: usize) -> Result<(ComplexTensor, Vec<f64>, ComplexTensor)> {
    // Column-major working copies.
    let mut w = vec![ZERO; m * n];
    for i in 0..m {
        for j in 0..n {
            w[j * m + i] = a[i * n + j];
        }
    }
    let mut rot = vec![ZERO; n * n];
    for j in 0..n {
        rot[j * n + j] = ONE;
    }

    let mut norms: Vec<f64> = (0..n)
        .map(|j| w[j * m..(j + 1) * m].iter().map(|z| z.norm_sqr()).sum())
        .collect();

    // Columns below `floor` are rounding noise and are treated as exact zeros.
    let total: f64 = norms.iter().sum();
    let eps = m as f64 * f64::EPSILON;
    let floor = total * eps * eps;
    let tol = JACOBI_TOL.max(eps);
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let (wp, wq) = two_columns(&mut w, m, p, q);
                let gamma: C64 = wp.iter().zip(wq.iter()).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase_conj = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(wp, wq, c, s, phase_conj);
                let (vp, vq) = two_columns(&mut rot, n, p, q);
                rotate(vp, vq, c, s, phase_conj);
                norms[p] = wp.iter().map(|z| z.norm_sqr()).sum();
                norms[q] = wq.iter().map(|z| z.norm_sqr()).sum();
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "Jacobi SVD of a {m}x{n} matrix did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let sv: Vec<f64> = norms
        .iter()
        .map(|&x| if x <= floor { 0.0 } else { x.sqrt() })
        .collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));

    let mut ucols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut zero_cols = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        let col = &w[j * m..(j + 1) * m];
        let sj = sv[j];
        s.push(sj);
        if sj > 0.0 {
            ucols.push(col.iter().map(|z| z / sj).collect());
        } else {
            ucols.push(vec![ZERO; m]);
            zero_cols.push(k);
        }
    }
    complete_orthonormal(&mut ucols, &zero_cols, m);

    let mut u = vec![ZERO; m * n];
    for (k, col) in ucols.iter().enumerate() {
        for i in 0..m {
            u[i * n + k] = col[i];
        }
    }
    // v = rot† in sorted order: row k of v is conj of column order[k] of rot.
    let mut v = vec![ZERO; n * n];
    for (k, &j) in order.iter().enumerate() {
        for i in 0..n {
            v[k * n + i] = rot[j * n + i].conj();
        }
    }
    Ok((
        ComplexTensor::matrix(m, n, u)?,
        s,
        ComplexTensor::matrix(n, n, v)?,
    ))
}

fn two_columns(buf: &mut [C64], len: usize, p: usize, q: usize) -> (&mut [C64], &mut [C64]) {
    debug_assert!(p < q);
    let (head, tail) = buf.split_at_mut(q * len);
    (&mut head[p * len..(p + 1) * len], &mut tail[..len])
}

#[inline]
fn rotate(xp: &mut [C64], xq: &mut [C64], c: f64, s: f64, phase_conj: C64) {
    for (x, y) in xp.iter_mut().zip(xq.iter_mut()) {
        let a = *x;
        let b = *y * phase_conj;
        *x = a * c - b * s;
        *y = a * s + b * c;
    }
}

/// Replaces the listed (zero) columns with unit vectors orthogonal to all others.
fn complete_orthonormal(cols: &mut [Vec<C64>], targets: &[usize], m: usize) {
    let mut candidate = 0usize;
    for &t in targets {
        while candidate < m {
            let mut v = vec![ZERO; m];
            v[candidate] = ONE;
            candidate += 1;
            for _ in 0..2 {
                for (k, col) in cols.iter().enumerate() {
                    if k == t {
                        continue;
                    }
                    let proj: C64 = col.iter().zip(&v).map(|(c, x)| c.conj() * x).sum();
                    for (x, c) in v.iter_mut().zip(col) {
                        *x -= proj * c;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                cols[t] = v.into_iter().map(|z| z / norm).collect();
                break;
            }
        }
    }
}

/// Number of leading singular values (descending) kept under `cfg`; never below one.
pub fn kept_rank(s: &[f64], cfg: &TruncationConfig) -> usize {
    let Some(&s0) = s.first() else {
        return 0;
    };
    let kept = s
        .iter()
        .enumerate()
        .take_while(|&(i, &si)| i < cfg.max_bond && si >= cfg.abs_cutoff && si / s0 >= cfg.rel_cutoff)
        .count();
    kept.max(1)
}

pub fn svd_truncate(m: &ComplexTensor, cfg: &TruncationConfig) -> Result<TruncatedSvd> {
    m.require_matrix("svd_truncate")?;
    let full = svd(m)?;
    let keep = kept_rank(&full.s, cfg);
    let cap_limited = kept_rank(&full.s, &cfg.with_max_bond(usize::MAX)) > keep;
    let discarded_weight = full.s[keep..].iter().map(|x| x * x).sum();
    let (rows, k, cols) = (full.u.rows(), full.s.len(), full.v.cols());

    let u = if keep == k {
        full.u
    } else {
        let data = (0..rows)
            .flat_map(|i| full.u.data[i * k..i * k + keep].iter().copied())
            .collect();
        ComplexTensor::matrix(rows, keep, data)?
    };
    let v = if keep == k {
        full.v
    } else {
        ComplexTensor::matrix(keep, cols, full.v.data[..keep * cols].to_vec())?
    };
    let mut s = full.s;
    s.truncate(keep);
    Ok(TruncatedSvd {
        u,
        s,
        v,
        kept_rank: keep,
        discarded_weight,
        cap_limited,
    })
}

/// Thin Householder QR: `m = q · r` with `q` having orthonormal columns.
pub fn qr(m: &ComplexTensor) -> Result<(ComplexTensor, ComplexTensor)> {
    m.require_matrix("qr")?;
    let (rows, cols) = (m.rows(), m.cols());
    let k = rows.min(cols);
    let mut a = m.data.clone();
    let mut reflectors: Vec<Option<Vec<C64>>> = Vec::with_capacity(k);

    for j in 0..k {
        let x: Vec<C64> = (j..rows).map(|i| a[i * cols + j]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let phase = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * norm;
        let mut v = x;
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vn2 == 0.0 {
            reflectors.push(None);
            continue;
        }
        apply_reflector(&mut a, cols, j, j..cols, &v, vn2);
        reflectors.push(Some(v));
    }

    let mut r = vec![ZERO; k * cols];
    for i in 0..k {
        for j in i..cols {
            r[i * cols + j] = a[i * cols + j];
        }
    }
    let mut q = vec![ZERO; rows * k];
    for i in 0..k {
        q[i * k + i] = ONE;
    }
    for (j, v) in reflectors.iter().enumerate().rev() {
        if let Some(v) = v {
            let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            apply_reflector(&mut q, k, j, 0..k, v, vn2);
        }
    }
    Ok((
        ComplexTensor::matrix(rows, k, q)?,
        ComplexTensor::matrix(k, cols, r)?,
    ))
}

/// Applies `I − 2 v v† / |v|²` to rows `start..` of a row-major matrix, restricted to `columns`.
fn apply_reflector(
    a: &mut [C64],
    stride: usize,
    start: usize,
    columns: std::ops::Range<usize>,
    v: &[C64],
    vn2: f64,
) {
    for c in columns {
        let dot: C64 = v
            .iter()
            .enumerate()
            .map(|(i, vi)| vi.conj() * a[(start + i) * stride + c])
            .sum();
        let f = dot * (2.0 / vn2);
        for (i, vi) in v.iter().enumerate() {
            a[(start + i) * stride + c] -= f * vi;
        }
    }
}

/// Haar-random `dim × dim` unitary: QR of a complex Gaussian matrix with the
/// phases of `r`'s diagonal folded into `q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexTensor> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "random_unitary needs dim >= 2, got {dim}"
        )));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let data: Vec<C64> = (0..dim * dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * scale, im * scale)
        })
        .collect();
    let z = ComplexTensor::matrix(dim, dim, data)?;
    let (mut q, r) = qr(&z)?;
    for j in 0..dim {
        let d = r.data[j * dim + j];
        let phase = if d == ZERO { ONE } else { d / d.norm() };
        for i in 0..dim {
            q.data[i * dim + j] *= phase;
        }
    }
    Ok(q)
}

/// `‖u · diag(s) · v − m‖_F²`.
pub fn reconstruction_gap_sq(m: &ComplexTensor, u: &ComplexTensor, s: &[f64], v: &ComplexTensor) -> f64 {
    let (rows, k, cols) = (u.rows(), s.len(), v.cols());
    let mut us = u.data.clone();
    for i in 0..rows {
        for (j, sj) in s.iter().enumerate() {
            us[i * k + j] *= *sj;
        }
    }
    let rec = matmul_raw(&us, &v.data, rows, k, cols);
    rec.iter()
        .zip(&m.data)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexTensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        ComplexTensor::matrix(rows, cols, data).unwrap()
    }

    fn is_unitary(u: &ComplexTensor, tol: f64) -> bool {
        let prod = u.adjoint().unwrap().matmul(u).unwrap();
        prod.max_abs_diff(&ComplexTensor::identity(u.cols())) <= tol
    }

    #[test]
    fn rejects_inconsistent_shape() {
        assert!(ComplexTensor::new(vec![2, 2], vec![ZERO; 3]).is_err());
        assert!(ComplexTensor::new(vec![2, 0], vec![]).is_err());
    }

    #[test]
    fn reshape_keeps_sequence() {
        let t = random_matrix(3, 4, 1);
        let before = t.data().to_vec();
        let r = t.reshape(vec![2, 6]).unwrap();
        assert_eq!(r.data(), &before[..]);
        assert!(r.reshape(vec![5]).is_err());
    }

    #[test]
    fn identity_times_basis_vector() {
        let v = ComplexTensor::new(vec![2], vec![ONE, ZERO]).unwrap();
        let out = contract(&ComplexTensor::identity(2), &v, &[(1, 0)]).unwrap();
        assert_eq!(out.data(), &[ONE, ZERO]);
    }

    #[test]
    fn hadamard_on_zero_is_plus() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = ComplexTensor::matrix(2, 2, vec![c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)]).unwrap();
        let v = ComplexTensor::new(vec![2], vec![ONE, ZERO]).unwrap();
        let out = contract(&had, &v, &[(1, 0)]).unwrap();
        assert!((out.data()[0] - c(h, 0.)).norm() < 1e-15);
        assert!((out.data()[1] - c(h, 0.)).norm() < 1e-15);
    }

    #[test]
    fn contract_extent_mismatch_is_error() {
        let a = ComplexTensor::zeros(vec![2, 3]);
        let b = ComplexTensor::zeros(vec![2, 3]);
        assert!(matches!(contract(&a, &b, &[(1, 0)]), Err(Error::Shape(_))));
    }

    #[test]
    fn full_contraction_is_scalar() {
        let a = random_matrix(2, 3, 4);
        let out = contract(&a, &a, &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(out.shape(), &[] as &[usize]);
        let expect: C64 = a.data().iter().map(|z| z * z).sum();
        assert!((out.data()[0] - expect).norm() < 1e-12);
    }

    #[test]
    fn cutoff_rule_on_known_spectrum() {
        let cfg = TruncationConfig::default();
        assert_eq!(kept_rank(&[1.0, 0.5, 1e-6], &cfg), 2);
        // Values exactly at the cutoff are kept.
        let cfg = TruncationConfig::new(64, 0.5, 0.0).unwrap();
        assert_eq!(kept_rank(&[1.0, 0.5, 0.4], &cfg), 2);
        // At least one value survives.
        let cfg = TruncationConfig::new(64, 10.0, 0.0).unwrap();
        assert_eq!(kept_rank(&[1.0, 0.5], &cfg), 1);
        let cfg = TruncationConfig::new(1, 0.0, 0.0).unwrap();
        assert_eq!(kept_rank(&[1.0, 0.9, 0.8], &cfg), 1);
    }

    #[test]
    fn truncation_on_diagonal_matrix() {
        let m = ComplexTensor::matrix(
            3,
            3,
            vec![c(1., 0.), ZERO, ZERO, ZERO, c(0.5, 0.), ZERO, ZERO, ZERO, c(1e-6, 0.)],
        )
        .unwrap();
        let t = svd_truncate(&m, &TruncationConfig::default()).unwrap();
        assert_eq!(t.kept_rank, 2);
        assert!((t.discarded_weight - 1e-12).abs() < 1e-20);
    }

    #[test]
    fn unitary_input_keeps_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(4, &mut rng).unwrap();
        let t = svd_truncate(&u, &TruncationConfig::default()).unwrap();
        assert_eq!(t.kept_rank, 4);
        assert!(t.discarded_weight < 1e-24);
        for s in &t.s {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_of_rank_deficient_matrix_has_isometric_u() {
        // Rank one, 4x3: two exact zero singular values.
        let col = [c(1., 0.), c(0., 1.), c(2., 0.), ZERO];
        let row = [c(1., 0.), c(0.5, 0.), c(0., -1.)];
        let data = col.iter().flat_map(|a| row.iter().map(move |b| a * b)).collect();
        let m = ComplexTensor::matrix(4, 3, data).unwrap();
        let f = svd(&m).unwrap();
        assert!(is_unitary(&f.u, 1e-12));
        assert!(reconstruction_gap_sq(&m, &f.u, &f.s, &f.v) < 1e-24);
    }

    #[test]
    fn repeated_rows_with_rounding_noise_converge() {
        let r0 = [c(8.0e-16, 0.3729285958515668), c(-3.0e-17, -0.0374395226708427), c(8.1e-16, 0.3729285958515652), c(4.9e-17, 0.0374395226708428)];
        let r1 = [c(0.3281961058841251, -7.1e-16), c(0.0425424566856984, -6.9e-17), c(-0.3281961058841264, 7.2e-16), c(0.0425424566856982, -9.1e-17)];
        let data: Vec<C64> = [r0, r0, r1, r1].concat();
        let m = ComplexTensor::matrix(4, 4, data).unwrap();
        let d = svd(&m).unwrap();
        assert!(is_unitary(&d.u, 1e-12));
        assert!(d.s[2] < 1e-14 && d.s[3] < 1e-14);
        assert!(reconstruction_gap_sq(&m, &d.u, &d.s, &d.v) < 1e-26);
    }

    #[test]
    fn wide_matrix_svd() {
        let m = random_matrix(3, 7, 11);
        let f = svd(&m).unwrap();
        assert_eq!(f.u.shape(), &[3, 3]);
        assert_eq!(f.v.shape(), &[3, 7]);
        assert!(reconstruction_gap_sq(&m, &f.u, &f.s, &f.v).sqrt() < 1e-12);
        assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_rejects_non_matrix() {
        let t = ComplexTensor::zeros(vec![2, 2, 2]);
        assert!(matches!(svd_truncate(&t, &TruncationConfig::default()), Err(Error::Shape(_))));
    }

    #[test]
    fn qr_reconstructs() {
        for (r, cc) in [(5, 3), (3, 5), (4, 4)] {
            let m = random_matrix(r, cc, (r * 10 + cc) as u64);
            let (q, rr) = qr(&m).unwrap();
            assert!(is_unitary(&q, 1e-12));
            assert!(q.matmul(&rr).unwrap().max_abs_diff(&m) < 1e-12);
        }
    }

    #[test]
    fn random_unitary_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(2, &mut rng).unwrap();
        assert!(is_unitary(&u, 1e-12));
        let a = random_unitary(4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_unitary(4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(random_unitary(1, &mut rng).is_err());
    }

    #[test]
    fn truncation_config_validation() {
        assert!(TruncationConfig::new(0, 0.0, 0.0).is_err());
        assert!(TruncationConfig::new(4, -1.0, 0.0).is_err());
        assert!(TruncationConfig::new(4, 0.0, 1.0).is_err());
        let d = TruncationConfig::default();
        assert_eq!((d.max_bond, d.abs_cutoff, d.rel_cutoff), (64, 1e-5, 1e-5));
    }
}
