//! The channel `E = (1/n) T T*` and the Markov operator `B = (1/n) T* T`.
//!
//! With `H = diag(sqrt(n alpha)) G`, where the rows of `G` are the Gell-Mann
//! coordinates of the states `F_s`, the channel matrix is `H^T H` and the
//! alpha-symmetrized Markov matrix is `H H^T`. Both are real symmetric PSD,
//! so their positive spectra coincide.

use nalgebra::DMatrix;
use serde::Serialize;

use super::DiscretePovm;
use crate::basis::HermitianBasis;
use crate::error::Result;
use crate::operator::{eigh_real, HermitianOperator};

/// Eigenvalues at or below this are treated as zero when matching spectra.
pub const POSITIVE_EIGEN_TOL: f64 = 1e-7;

/// Matrix of the channel in the orthonormal Gell-Mann basis.
#[derive(Debug, Clone)]
pub struct SuperoperatorMatrix {
    basis: HermitianBasis,
    matrix: DMatrix<f64>,
}

impl SuperoperatorMatrix {
    pub fn basis(&self) -> HermitianBasis {
        self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Applies the channel to an operator.
    pub fn apply(&self, a: &HermitianOperator) -> HermitianOperator {
        let c = nalgebra::DVector::from_vec(self.basis.coords(a));
        let out = &self.matrix * c;
        self.basis.from_coords(out.as_slice())
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigh_real(&self.matrix)?.0)
    }
}

/// Markov kernel `B[t][s] = n alpha_s ((F_s, F_t))` with stationary weights `alpha`.
#[derive(Debug, Clone)]
pub struct MarkovMatrix {
    matrix: DMatrix<f64>,
    alpha: Vec<f64>,
}

impl MarkovMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn size(&self) -> usize {
        self.alpha.len()
    }

    /// `(B phi)(t) = sum_s B[t][s] phi_s`.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(phi);
        (&self.matrix * v).as_slice().to_vec()
    }

    /// `diag(sqrt(alpha)) B diag(1/sqrt(alpha))`, symmetric for a reversible chain.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let n = self.size();
        DMatrix::from_fn(n, n, |t, s| {
            self.matrix[(t, s)] * (self.alpha[t] / self.alpha[s]).sqrt()
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.row_iter().map(|r| r.sum()).collect()
    }

    /// Inner product of `L^2(alpha)`.
    pub fn inner(&self, phi: &[f64], psi: &[f64]) -> f64 {
        self.alpha
            .iter()
            .zip(phi.iter().zip(psi))
            .map(|(a, (x, y))| a * x * y)
            .sum()
    }
}

/// Spectral gap together with both spectra.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub gamma: f64,
    /// Eigenvalues of the channel, descending (length `n^2`).
    pub spectrum_e: Vec<f64>,
    /// Eigenvalues of the Markov operator, descending (length `N`).
    pub spectrum_b: Vec<f64>,
    /// Largest discrepancy between the two positive spectra.
    pub match_error: f64,
}

/// `diag(sqrt(n alpha)) G`.
pub(crate) fn weighted_coordinates(povm: &DiscretePovm) -> DMatrix<f64> {
    let mut h = povm.coordinate_matrix();
    let n = povm.dim() as f64;
    for (s, o) in povm.outcomes().iter().enumerate() {
        h.row_mut(s).scale_mut((n * o.alpha).sqrt());
    }
    h
}

pub fn channel_matrix(povm: &DiscretePovm) -> SuperoperatorMatrix {
    let h = weighted_coordinates(povm);
    let mut matrix = h.transpose() * &h;
    symmetrize(&mut matrix);
    SuperoperatorMatrix {
        basis: HermitianBasis::new(povm.dim()),
        matrix,
    }
}

pub fn markov_matrix(povm: &DiscretePovm) -> MarkovMatrix {
    let gram = povm.gram();
    let alpha = povm.alphas();
    let n = povm.dim() as f64;
    let size = alpha.len();
    let matrix = DMatrix::from_fn(size, size, |t, s| n * alpha[s] * gram[(t, s)]);
    MarkovMatrix { matrix, alpha }
}

/// Symmetrized Markov matrix computed directly as `H H^T`.
pub(crate) fn symmetric_markov(povm: &DiscretePovm) -> DMatrix<f64> {
    let h = weighted_coordinates(povm);
    let mut s = &h * h.transpose();
    symmetrize(&mut s);
    s
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// `gamma = 1 - gamma_2`, where `gamma_2` is the second-largest eigenvalue of
/// the channel counted with multiplicity over its full PSD spectrum. A
/// one-dimensional Hilbert space has no second eigenvalue and gets `gamma = 1`.
pub fn spectral_gap(povm: &DiscretePovm) -> Result<GapReport> {
    let spectrum_e = channel_matrix(povm).eigenvalues()?;
    let spectrum_b = eigh_real(&symmetric_markov(povm))?.0;
    let second = spectrum_e.get(1).copied().unwrap_or(0.0);
    let gamma = (1.0 - second).max(0.0);
    let match_error = positive_match_error(&spectrum_e, &spectrum_b);
    Ok(GapReport {
        gamma,
        spectrum_e,
        spectrum_b,
        match_error,
    })
}

fn positive_match_error(a: &[f64], b: &[f64]) -> f64 {
    let pa: Vec<f64> = a.iter().copied().filter(|x| *x > POSITIVE_EIGEN_TOL).collect();
    let pb: Vec<f64> = b.iter().copied().filter(|x| *x > POSITIVE_EIGEN_TOL).collect();
    let len = pa.len().max(pb.len());
    (0..len)
        .map(|i| {
            let x = pa.get(i).copied().unwrap_or(0.0);
            let y = pb.get(i).copied().unwrap_or(0.0);
            (x - y).abs()
        })
        .fold(0.0, f64::max)
}
