// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex matrices and their spectral calculus.
//!
//! Coins, spin Hamiltonians and direction operators are all tiny (2, 3, 4 or
//! 6 dimensional) normal matrices, so everything here is written for clarity
//! over asymptotic speed. Spectral decompositions go through complex Jacobi
//! rotations; unitary inputs are split into the commuting Hermitian pair
//! `(U + U†)/2` and `(U − U†)/2i` and diagonalized jointly.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Tolerance for the normality / unitarity / hermiticity preconditions.
pub const PRECONDITION_TOL: f64 = 1e-8;
/// Eigenvalues closer than this are merged into one spectral projector.
pub const CLUSTER_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix is not normal (‖MM† − M†M‖ = {residual:e})")]
    NotNormal { residual: f64 },
    #[error("matrix is not unitary (‖M†M − I‖ = {residual:e})")]
    NotUnitary { residual: f64 },
    #[error("matrix is not Hermitian (‖M − M†‖ = {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("spectral routines support dimensions 2, 3, 4 and 6, got {0}")]
    DimensionUnsupported(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries for a square matrix, got {got}")]
    BadShape { expected: usize, got: usize },
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self, MatrixError> {
        if data.len() != dim * dim {
            return Err(MatrixError::BadShape { expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input, so it is
    /// meant for literals.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), dim, "ragged matrix literal");
            data.extend_from_slice(row);
        }
        Self { dim, data }
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Kronecker product `self ⊗ other`; the left factor indexes the outer blocks.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>, MatrixError> {
        if v.len() != self.dim {
            return Err(MatrixError::DimensionMismatch { left: self.dim, right: v.len() });
        }
        Ok((0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |a_ij − b_ij|`, or infinity when the dimensions differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖M†M − I‖_max`.
    pub fn unitarity_residual(&self) -> f64 {
        let prod = self.adjoint().mul(self).expect("same dimension");
        prod.max_abs_diff(&Self::identity(self.dim))
    }

    /// `‖M − M†‖_max`.
    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `‖MM† − M†M‖_max`.
    pub fn normality_residual(&self) -> f64 {
        let a = self.adjoint();
        let left = self.mul(&a).expect("same dimension");
        let right = a.mul(self).expect("same dimension");
        left.max_abs_diff(&right)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].norm().total_cmp(&a[s * n + col].norm()))
                .unwrap_or(col);
            if a[pivot * n + col] == ZERO {
                return ZERO;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                if f == ZERO {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= f * v;
                }
            }
        }
        det
    }

    fn check_same_dim(&self, other: &Self) -> Result<(), MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// Serialized as nested rows of `[re, im]` pairs.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim))?;
        for i in 0..self.dim {
            let row: Vec<[f64; 2]> = self.row(i).iter().map(|z| [z.re, z.im]).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let dim = rows.len();
        let data: Vec<Complex64> =
            rows.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect();
        Self::from_vec(dim, data).map_err(serde::de::Error::custom)
    }
}

/// Which normal class a matrix is declared to belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralKind {
    Unitary,
    Hermitian,
}

/// `M = Σ λ_k P_k` with orthogonal projectors grouped by eigenvalue.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    pub projectors: Vec<ComplexMatrix>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.projectors.first().map_or(0, ComplexMatrix::dim)
    }

    /// `Σ f(λ_k) P_k`.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (&lambda, p) in self.eigenvalues.iter().zip(&self.projectors) {
            let w = f(lambda);
            for (o, &x) in out.data.iter_mut().zip(&p.data) {
                *o += w * x;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|z| z)
    }

    /// Rank of each grouped projector (its trace, rounded).
    pub fn ranks(&self) -> Vec<usize> {
        self.projectors.iter().map(|p| p.trace().re.round() as usize).collect()
    }
}

fn check_supported(dim: usize) -> Result<(), MatrixError> {
    match dim {
        2 | 3 | 4 | 6 => Ok(()),
        d => Err(MatrixError::DimensionUnsupported(d)),
    }
}

/// Spectral decomposition of a unitary or Hermitian matrix.
///
/// Eigenvalues that agree within [`CLUSTER_TOL`] share one projector. Unitary
/// eigenvalues come out ordered by principal phase, Hermitian ones ascending.
pub fn spectral_decompose(
    m: &ComplexMatrix,
    kind: SpectralKind,
) -> Result<SpectralDecomposition, MatrixError> {
    check_supported(m.dim())?;
    let residual = m.normality_residual();
    if residual > PRECONDITION_TOL {
        return Err(MatrixError::NotNormal { residual });
    }
    let (values, vectors) = match kind {
        SpectralKind::Hermitian => {
            let residual = m.hermiticity_residual();
            if residual > PRECONDITION_TOL {
                return Err(MatrixError::NotHermitian { residual });
            }
            let (vals, vecs) = jacobi_hermitian(&hermitian_part(m));
            (vals.into_iter().map(|v| Complex64::new(v, 0.0)).collect::<Vec<_>>(), vecs)
        }
        SpectralKind::Unitary => {
            let residual = m.unitarity_residual();
            if residual > PRECONDITION_TOL {
                return Err(MatrixError::NotUnitary { residual });
            }
            let vecs = joint_eigenvectors(m);
            let vals = (0..m.dim()).map(|k| rayleigh(m, &vecs, k)).collect();
            (vals, vecs)
        }
    };
    Ok(group_spectrum(kind, &values, &vectors))
}

/// Principal logarithm of a unitary matrix: every eigenphase of the result
/// lies in `(−π, π]`, with eigenvalue −1 mapped to `+iπ`.
pub fn principal_log_unitary(u: &ComplexMatrix) -> Result<ComplexMatrix, MatrixError> {
    let spec = spectral_decompose(u, SpectralKind::Unitary)?;
    Ok(spec.map(|lambda| I * principal_phase(lambda)))
}

/// `exp(−i h t)` for Hermitian `h`.
pub fn exp_minus_i_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix, MatrixError> {
    let spec = spectral_decompose(h, SpectralKind::Hermitian)?;
    Ok(spec.map(|lambda| Complex64::from_polar(1.0, -lambda.re * t)))
}

/// Argument in `(−π, π]`. Values within [`CLUSTER_TOL`] of `−π` are moved to
/// the `+π` side so that −1 always maps to `+π`.
pub fn principal_phase(z: Complex64) -> f64 {
    let theta = z.arg();
    if theta <= -PI + CLUSTER_TOL {
        theta + 2.0 * PI
    } else {
        theta
    }
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    m.add(&m.adjoint()).expect("same dimension").scale(Complex64::new(0.5, 0.0))
}

fn skew_part_over_i(m: &ComplexMatrix) -> ComplexMatrix {
    // (M − M†) / 2i
    m.sub(&m.adjoint()).expect("same dimension").scale(Complex64::new(0.0, -0.5))
}

fn rayleigh(m: &ComplexMatrix, vecs: &ComplexMatrix, k: usize) -> Complex64 {
    let n = m.dim();
    let mut acc = ZERO;
    for i in 0..n {
        let vi = vecs[(i, k)].conj();
        if vi == ZERO {
            continue;
        }
        let mv: Complex64 = (0..n).map(|j| m[(i, j)] * vecs[(j, k)]).sum();
        acc += vi * mv;
    }
    acc
}

/// Eigenvectors (as columns) of a normal matrix via its commuting Hermitian
/// parts: diagonalize the Hermitian part, then resolve each near-degenerate
/// cluster with the skew part restricted to that cluster.
fn joint_eigenvectors(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim();
    let (alpha, mut q) = jacobi_hermitian(&hermitian_part(m));
    let beta = skew_part_over_i(m);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| alpha[a].total_cmp(&alpha[b]));
    // Hermitian-part clusters are formed loosely; the skew part separates
    // whatever the real parts fail to.
    const SPLIT_TOL: f64 = 1e-6;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && alpha[order[end]] - alpha[order[end - 1]] < SPLIT_TOL {
            end += 1;
        }
        if end - start > 1 {
            let cols: Vec<usize> = order[start..end].to_vec();
            let k = cols.len();
            let mut restricted = ComplexMatrix::zeros(k);
            for (a, &ca) in cols.iter().enumerate() {
                for (b, &cb) in cols.iter().enumerate() {
                    let mut acc = ZERO;
                    for i in 0..n {
                        let left = q[(i, ca)].conj();
                        for j in 0..n {
                            acc += left * beta[(i, j)] * q[(j, cb)];
                        }
                    }
                    restricted[(a, b)] = acc;
                }
            }
            let (_, w) = jacobi_hermitian(&hermitian_part(&restricted));
            let old: Vec<Vec<Complex64>> =
                cols.iter().map(|&c| (0..n).map(|i| q[(i, c)]).collect()).collect();
            for (b, &cb) in cols.iter().enumerate() {
                for i in 0..n {
                    q[(i, cb)] = (0..k).map(|a| old[a][i] * w[(a, b)]).sum();
                }
            }
        }
        start = end;
    }
    q
}

/// Cyclic complex Jacobi for a Hermitian matrix. Returns eigenvalues and the
/// unitary whose columns are the matching eigenvectors.
fn jacobi_hermitian(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.dim();
    let mut a = h.clone();
    let mut q = ComplexMatrix::identity(n);
    let scale = h.max_abs().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apq = a[(p, r)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let (app, aqq) = (a[(p, p)].re, a[(r, r)].re);
                let theta = 0.5 * (2.0 * mag).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // V restricted to the (p, r) plane:
                //   [[c, s], [−s·e^{−iφ}, c·e^{−iφ}]]
                let ph = phase.conj();
                let v = [[Complex64::new(c, 0.0), Complex64::new(s, 0.0)], [-ph * s, ph * c]];
                // A ← A V
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, r)]);
                    a[(k, p)] = x * v[0][0] + y * v[1][0];
                    a[(k, r)] = x * v[0][1] + y * v[1][1];
                }
                // A ← V† A
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(r, k)]);
                    a[(p, k)] = v[0][0].conj() * x + v[1][0].conj() * y;
                    a[(r, k)] = v[0][1].conj() * x + v[1][1].conj() * y;
                }
                a[(p, r)] = ZERO;
                a[(r, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(r, r)] = Complex64::new(a[(r, r)].re, 0.0);
                // Q ← Q V
                for k in 0..n {
                    let (x, y) = (q[(k, p)], q[(k, r)]);
                    q[(k, p)] = x * v[0][0] + y * v[1][0];
                    q[(k, r)] = x * v[0][1] + y * v[1][1];
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), q)
}

fn group_spectrum(
    kind: SpectralKind,
    values: &[Complex64],
    vectors: &ComplexMatrix,
) -> SpectralDecomposition {
    let n = values.len();
    let key = |z: Complex64| match kind {
        SpectralKind::Hermitian => z.re,
        SpectralKind::Unitary => principal_phase(z),
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key(values[a]).total_cmp(&key(values[b])));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        let joined = groups.iter_mut().find(|g| (values[g[0]] - values[idx]).norm() < CLUSTER_TOL);
        match joined {
            Some(g) => g.push(idx),
            None => groups.push(vec![idx]),
        }
    }

    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for g in &groups {
        let mean: Complex64 = g.iter().map(|&k| values[k]).sum::<Complex64>() / g.len() as f64;
        let lambda = match kind {
            SpectralKind::Hermitian => Complex64::new(mean.re, 0.0),
            SpectralKind::Unitary => mean / mean.norm(),
        };
        let basis = gram_schmidt(g.iter().map(|&k| (0..n).map(|i| vectors[(i, k)]).collect()));
        let mut p = ComplexMatrix::zeros(n);
        for v in &basis {
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        eigenvalues.push(lambda);
        projectors.push(p);
    }
    SpectralDecomposition { eigenvalues, projectors }
}

/// Modified Gram–Schmidt over a cluster of nearly orthonormal vectors.
fn gram_schmidt(vectors: impl Iterator<Item = Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for mut v in vectors {
        for b in &basis {
            let overlap: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= overlap * bi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            v.iter_mut().for_each(|z| *z /= norm);
            basis.push(v);
        }
    }
    basis
}
