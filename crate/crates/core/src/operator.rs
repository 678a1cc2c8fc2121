//! Dense Hermitian operators, states and eigendecompositions.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance on `|A_ij - conj(A_ji)|` when validating input matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Negative eigenvalues above `-CLAMP_TOL` are clamped to zero for states.
pub const CLAMP_TOL: f64 = 1e-10;
/// Negative eigenvalues above this are treated as zero without modification.
const EIGEN_NOISE: f64 = 1e-14;
/// Trace tolerance for density operators.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues below this make `sqrt_psd` fail.
pub const SQRT_NEG_TOL: f64 = 1e-8;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// A Hermitian operator on `C^n`, stored densely.
#[derive(Clone, PartialEq)]
pub struct HermitianOperator {
    m: DMatrix<Complex64>,
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianOperator({}x{}) {}", self.dim(), self.dim(), self.m)
    }
}

impl HermitianOperator {
    /// Validates conjugate symmetry to [`HERMITIAN_TOL`] and stores the exact
    /// Hermitian part.
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut deviation = 0.0f64;
        for i in 0..rows {
            for j in i..rows {
                deviation = deviation.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Wraps a matrix known to be Hermitian, forcing exact conjugate symmetry.
    pub(crate) fn from_matrix_unchecked(m: DMatrix<Complex64>) -> Self {
        Self::symmetrized(m)
    }

    fn symmetrized(mut m: DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        for i in 0..n {
            m[(i, i)].im = 0.0;
            for j in (i + 1)..n {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Self { m }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let n = diag.len();
        let mut m = DMatrix::from_element(n, n, C0);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(*d, 0.0);
        }
        Ok(Self { m })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: DMatrix::from_element(n, n, C0),
        }
    }

    /// Rank-one operator `v v*` (not normalized).
    pub fn outer(v: &DVector<Complex64>) -> Self {
        Self::symmetrized(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// Hilbert-Schmidt inner product `tr(AB)`.
    pub fn hs_inner(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.hs_inner_unchecked(other))
    }

    pub(crate) fn hs_inner_unchecked(&self, other: &Self) -> f64 {
        // tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_inner_unchecked(self).max(0.0).sqrt()
    }

    /// `||self - other||_HS`.
    pub fn hs_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.hs_norm())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            m: &self.m + &other.m,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            m: &self.m - &other.m,
        })
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            m: self.m.map(|x| x * a),
        }
    }

    /// `self += a * other`, used in hot accumulation loops.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.dim(), other.dim());
        for (x, y) in self.m.iter_mut().zip(other.m.iter()) {
            *x += y * a;
        }
    }

    pub fn square(&self) -> Self {
        Self::symmetrized(&self.m * &self.m)
    }

    /// `outer * self * outer`, Hermitian whenever both factors are.
    pub fn sandwich(&self, outer: &Self) -> Result<Self> {
        check_dims(self.dim(), outer.dim())?;
        Ok(Self::symmetrized(&outer.m * &self.m * &outer.m))
    }

    /// Conjugation `U self U*` by an arbitrary square matrix.
    pub fn conjugate_by(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        check_dims(self.dim(), u.nrows())?;
        Ok(Self::symmetrized(u * &self.m * u.adjoint()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn eigh(&self) -> Result<EigenDecomposition> {
        eigh(self)
    }
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let rows: Vec<Vec<[f64; 2]>> = (0..n)
            .map(|i| (0..n).map(|j| [self.m[(i, j)].re, self.m[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        matrix_from_pairs(&rows)
            .and_then(HermitianOperator::from_matrix)
            .map_err(serde::de::Error::custom)
    }
}

/// Builds a complex matrix from row-major `[re, im]` pairs.
pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<Complex64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    for r in rows {
        if r.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: r.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// Hilbert-Schmidt inner product `tr(AB)`.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.hs_inner(b)
}

/// Eigenvalues sorted descending with matching orthonormal eigenvectors
/// (columns of `eigenvectors`).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    /// `V f(Λ) V*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let v = &self.eigenvectors;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(*lam);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        HermitianOperator::from_matrix_unchecked(scaled * v.adjoint())
    }

    /// `||H - V Λ V*||_HS`.
    pub fn residual(&self, h: &HermitianOperator) -> f64 {
        let r = self.reconstruct_with(|x| x);
        h.sub(&r).map(|d| d.hs_norm()).unwrap_or(f64::INFINITY)
    }

    /// `||V* V - Id||` (Frobenius).
    pub fn orthonormality_defect(&self) -> f64 {
        let v = &self.eigenvectors;
        let g = v.adjoint() * v - DMatrix::<Complex64>::identity(v.ncols(), v.ncols());
        g.norm()
    }

    pub fn eigenvector(&self, k: usize) -> DVector<Complex64> {
        self.eigenvectors.column(k).into_owned()
    }
}

/// Hermitian eigendecomposition, eigenvalues descending.
pub fn eigh(h: &HermitianOperator) -> Result<EigenDecomposition> {
    let n = h.dim();
    let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, 1000 * n.max(1))
        .ok_or(Error::EigenNonConvergence {
            residual: f64::INFINITY,
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    let dec = EigenDecomposition {
        eigenvalues,
        eigenvectors,
    };
    let residual = dec.residual(h);
    if residual > 1e-9 * h.hs_norm().max(1.0) {
        return Err(Error::EigenNonConvergence { residual });
    }
    Ok(dec)
}

/// Real symmetric eigendecomposition, eigenvalues descending; eigenvectors
/// are the columns of the returned matrix.
pub(crate) fn eigh_real(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 * n).ok_or(
        Error::EigenNonConvergence {
            residual: f64::INFINITY,
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    let mut recon = vectors.clone();
    for (j, lam) in values.iter().enumerate() {
        recon.column_mut(j).scale_mut(*lam);
    }
    let residual = (m - recon * vectors.transpose()).norm();
    if residual > 1e-9 * m.norm().max(1.0) {
        return Err(Error::EigenNonConvergence { residual });
    }
    Ok((values, vectors))
}

/// Square root of a positive semidefinite operator. Eigenvalues in
/// `[-1e-8, 0)` are clamped to zero.
pub fn sqrt_psd(h: &HermitianOperator) -> Result<HermitianOperator> {
    let dec = eigh(h)?;
    let min = dec.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -SQRT_NEG_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    Ok(dec.reconstruct_with(|x| x.max(0.0).sqrt()))
}

/// A positive trace-one operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    /// Validates trace and positivity; eigenvalues in `[-1e-10, -1e-14)` are
    /// clamped to zero and the trace restored. Smaller negative eigenvalues
    /// are eigensolver noise and leave the input untouched.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace });
        }
        let dec = eigh(&op)?;
        let min = dec.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -CLAMP_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        if min < -EIGEN_NOISE {
            let clamped = dec.reconstruct_with(|x| x.max(0.0));
            let t = clamped.trace();
            return Ok(Self {
                op: clamped.scale(1.0 / t),
            });
        }
        Ok(Self { op })
    }

    /// Wraps an operator already known to be a state.
    pub(crate) fn new_unchecked(op: HermitianOperator) -> Self {
        Self { op }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_op(self) -> HermitianOperator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Purity `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.op.hs_inner_unchecked(&self.op)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let op = HermitianOperator::deserialize(d)?;
        DensityOperator::new(op).map_err(serde::de::Error::custom)
    }
}

/// The maximally mixed state `Id/n`.
pub fn maximally_mixed(n: usize) -> Result<DensityOperator> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(DensityOperator::new_unchecked(
        HermitianOperator::identity(n).scale(1.0 / n as f64),
    ))
}

/// A rank-one projector together with a unit vector spanning its range.
#[derive(Debug, Clone)]
pub struct PureProjector {
    vector: DVector<Complex64>,
    op: HermitianOperator,
}

impl PureProjector {
    pub fn vector(&self) -> &DVector<Complex64> {
        &self.vector
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::new_unchecked(self.op.clone())
    }
}

/// Projector onto `span(v)`.
pub fn pure_from_vector(v: &DVector<Complex64>) -> Result<PureProjector> {
    if v.is_empty() {
        return Err(Error::ZeroDimension);
    }
    let norm = v.norm();
    if norm <= 1e-12 {
        return Err(Error::ZeroVector { norm });
    }
    let vector = v / Complex64::new(norm, 0.0);
    let op = HermitianOperator::outer(&vector);
    Ok(PureProjector { vector, op })
}

/// Pauli matrix `sigma_k` for `k` in 1..=3 (`k = 0` gives the identity).
pub fn pauli(k: usize) -> HermitianOperator {
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let m = match k {
        0 => DMatrix::from_row_slice(2, 2, &[one, C0, C0, one]),
        1 => DMatrix::from_row_slice(2, 2, &[C0, one, one, C0]),
        2 => DMatrix::from_row_slice(2, 2, &[C0, -i, i, C0]),
        3 => DMatrix::from_row_slice(2, 2, &[one, C0, C0, -one]),
        _ => panic!("pauli index {k} out of range"),
    };
    HermitianOperator::from_matrix_unchecked(m)
}

/// Qubit state `(Id + r . sigma)/2` for a Bloch vector `r`.
pub fn bloch_state(r: [f64; 3]) -> HermitianOperator {
    let mut out = pauli(0).scale(0.5);
    for (k, rk) in r.iter().enumerate() {
        out.axpy(0.5 * rk, &pauli(k + 1));
    }
    out
}
