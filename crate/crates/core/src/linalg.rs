//! Dense complex matrices at the small sizes used for qubit states.
//!
//! Storage is row-major. Basis indices follow the convention that qubit 0
//! is the most significant bit.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Entrywise tolerance for the Hermitian precondition.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_CLAMP, 0)` are rounding noise and get clamped to zero.
pub const PSD_CLAMP: f64 = 1e-10;
/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
pub const MAX_DIM: usize = 64;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; fails unless `data.len() == dim²`.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::WrongDimension {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::WrongDimension {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    /// |v⟩⟨v|
    pub fn outer(v: &[C64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |m_ij − conj(m_ji)|
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Pauli Y.
pub fn sigma_y() -> CMatrix {
    let mut m = CMatrix::zeros(2);
    m[(0, 1)] = c(0.0, -1.0);
    m[(1, 0)] = c(0.0, 1.0);
    m
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (da, db) = (a.dim, b.dim);
    let n = da * db;
    let mut out = CMatrix::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Real eigenvalues, descending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// V Λ V†
    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|x| x)
    }

    /// V f(Λ) V†
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.dim();
        let mut out = CMatrix::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eig(m: &CMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    if n > MAX_DIM {
        return Err(Error::WrongDimension {
            expected: MAX_DIM,
            got: n,
        });
    }
    let max_dev = m.hermiticity_deviation();
    if max_dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { max_dev });
    }

    // Work on the exactly Hermitian part.
    let mut a = CMatrix::zeros(n);
    for i in 0..n {
        a[(i, i)] = c(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let threshold = JACOBI_TOL * m.frobenius_norm().max(1.0);

    let off_norm = |a: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = CMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, col)] = v[(i, k)];
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Unitary J = diag(1, e^{-iφ}) · [[c, s], [−s, c]] for which J† H J is diagonal,
/// H = [[app, apq], [conj(apq), aqq]] Hermitian. Returned as (J_pp, J_pq, J_qp, J_qq).
fn rotation_2x2(app: f64, aqq: f64, apq: C64) -> (C64, C64, C64, C64) {
    let mag = apq.norm();
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    let e = phase.conj();
    (c(cs, 0.0), c(sn, 0.0), e * (-sn), e * cs)
}

/// Zeroes `a[p][q]`: A ← J†AJ, V ← VJ.
fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq.norm() == 0.0 {
        return;
    }
    let n = a.dim();
    let (j_pp, j_pq, j_qp, j_qq) = rotation_2x2(a[(p, p)].re, a[(q, q)].re, apq);
    rotate_columns(a, p, q, (j_pp, j_pq, j_qp, j_qq));
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[(p, q)] = c(0.0, 0.0);
    a[(q, p)] = c(0.0, 0.0);
    a[(p, p)] = c(a[(p, p)].re, 0.0);
    a[(q, q)] = c(a[(q, q)].re, 0.0);
    rotate_columns(v, p, q, (j_pp, j_pq, j_qp, j_qq));
}

#[inline]
fn rotate_columns(m: &mut CMatrix, p: usize, q: usize, j: (C64, C64, C64, C64)) {
    let (j_pp, j_pq, j_qp, j_qq) = j;
    for k in 0..m.dim() {
        let mp = m[(k, p)];
        let mq = m[(k, q)];
        m[(k, p)] = mp * j_pp + mq * j_qp;
        m[(k, q)] = mp * j_pq + mq * j_qq;
    }
}

/// Singular values (descending) by one-sided Jacobi. Small singular values
/// come out with absolute accuracy near machine epsilon times the norm,
/// unlike square roots of eigenvalues of `M†M`.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    let mut a = m.clone();
    let col_dot = |a: &CMatrix, p: usize, q: usize| -> C64 {
        (0..n).map(|k| a[(k, p)].conj() * a[(k, q)]).sum()
    };
    let col_norm_sq = |a: &CMatrix, p: usize| -> f64 { (0..n).map(|k| a[(k, p)].norm_sqr()).sum() };
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = col_norm_sq(&a, p);
                let beta = col_norm_sq(&a, q);
                let gamma = col_dot(&a, p, q);
                if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                let j = rotation_2x2(alpha, beta, gamma);
                rotate_columns(&mut a, p, q, j);
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: f64::NAN,
            });
        }
    }
    let mut values: Vec<f64> = (0..n).map(|p| col_norm_sq(&a, p).sqrt()).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn matrix_sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    let min_eig = eig.values.last().copied().unwrap_or(0.0);
    if min_eig < -PSD_CLAMP {
        return Err(Error::NotPsd { min_eig });
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()))
}

/// Traces out every qubit not listed in `keep`. The kept qubits appear in
/// ascending index order in the result.
pub fn partial_trace(m: &CMatrix, n_qubits: usize, keep: &[usize]) -> Result<CMatrix> {
    if m.dim() != 1 << n_qubits {
        return Err(Error::WrongDimension {
            expected: 1 << n_qubits,
            got: m.dim(),
        });
    }
    let keep = normalize_keep(keep, n_qubits)?;
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !keep.contains(q)).collect();
    let dk = 1usize << keep.len();
    let dt = 1usize << traced.len();
    let mut out = CMatrix::zeros(dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut s = c(0.0, 0.0);
            for e in 0..dt {
                let row = compose_index(n_qubits, &keep, i, &traced, e);
                let col = compose_index(n_qubits, &keep, j, &traced, e);
                s += m[(row, col)];
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// Sorted, deduplicated, range-checked keep set.
pub(crate) fn normalize_keep(keep: &[usize], n_qubits: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::BadParameter("keep set is empty".into()));
    }
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    if let Some(&bad) = k.iter().find(|&&q| q >= n_qubits) {
        return Err(Error::BadIndex {
            index: bad,
            n_qubits,
        });
    }
    Ok(k)
}

/// Full basis index from the bit patterns of two disjoint qubit groups.
/// Bit `b` of a group pattern (MSB first) belongs to the group's `b`-th qubit.
#[inline]
pub(crate) fn compose_index(
    n_qubits: usize,
    group_a: &[usize],
    bits_a: usize,
    group_b: &[usize],
    bits_b: usize,
) -> usize {
    let mut idx = 0;
    for (pos, &q) in group_a.iter().enumerate() {
        let bit = (bits_a >> (group_a.len() - 1 - pos)) & 1;
        idx |= bit << (n_qubits - 1 - q);
    }
    for (pos, &q) in group_b.iter().enumerate() {
        let bit = (bits_b >> (group_b.len() - 1 - pos)) & 1;
        idx |= bit << (n_qubits - 1 - q);
    }
    idx
}
