use nalgebra::DMatrix;
use serde::Serialize;

use super::{best_fit, cloud_from_povm};
use crate::error::{Error, Result};
use crate::povm::noise::{fix_sign, restricted_markov_eigen};
use crate::povm::DiscretePovm;

pub const DEFAULT_THRESHOLD: f64 = 1e-9;

/// `psi_1(s) = ((F_s, A)) / sqrt(I - J)` for the best-fit direction `A`.
pub fn psi1(povm: &DiscretePovm) -> Result<Vec<f64>> {
    let fit = best_fit(&cloud_from_povm(povm))?;
    if fit.k <= 1e-12 {
        return Err(Error::DegenerateCloud { k: fit.k });
    }
    let a = fit.direction.expect("positive spread needs n > 1");
    let scale = fit.k.sqrt();
    let mut psi: Vec<f64> = povm
        .outcomes()
        .iter()
        .map(|o| o.state.op().hs_inner_unchecked(&a) / scale)
        .collect();
    fix_sign(&mut psi);
    Ok(psi)
}

/// Nontrivial eigenpairs of the Markov operator, eigenvalues in
/// decreasing order, eigenfunctions orthonormal in `L^2(alpha)`.
#[derive(Debug, Clone, Serialize)]
pub struct DiffusionSpectrum {
    pub alpha: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// `eigenfunctions[k][s] = psi_k(s)`.
    pub eigenfunctions: Vec<Vec<f64>>,
}

pub fn diffusion_spectrum(povm: &DiscretePovm, threshold: f64) -> Result<DiffusionSpectrum> {
    let alpha = povm.alphas();
    let (values, vectors): (Vec<f64>, DMatrix<f64>) = restricted_markov_eigen(povm)?;
    let mut eigenvalues = Vec::new();
    let mut eigenfunctions = Vec::new();
    for (k, &beta) in values.iter().enumerate() {
        if beta <= threshold {
            break;
        }
        let mut psi: Vec<f64> = vectors
            .column(k)
            .iter()
            .zip(&alpha)
            .map(|(v, a)| v / a.sqrt())
            .collect();
        fix_sign(&mut psi);
        eigenvalues.push(beta);
        eigenfunctions.push(psi);
    }
    Ok(DiffusionSpectrum {
        alpha,
        eigenvalues,
        eigenfunctions,
    })
}

impl DiffusionSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    fn check(&self, s: usize) -> Result<()> {
        let len = self.alpha.len();
        if s >= len {
            return Err(Error::InvalidIndex { index: s, len });
        }
        Ok(())
    }

    /// `D_tau(s, t) = sqrt(sum_k beta_k^{2 tau} (psi_k(s) - psi_k(t))^2)`.
    pub fn distance(&self, tau: f64, s: usize, t: usize) -> Result<f64> {
        self.weighted_distance(tau, 1.0, s, t)
    }

    /// `D_tau(s, t) / beta_1^tau`, finite for large `tau` where `D_tau` underflows.
    pub fn scaled_distance(&self, tau: f64, s: usize, t: usize) -> Result<f64> {
        let top = self.eigenvalues.first().copied().unwrap_or(1.0);
        self.weighted_distance(tau, top, s, t)
    }

    fn weighted_distance(&self, tau: f64, unit: f64, s: usize, t: usize) -> Result<f64> {
        self.check(s)?;
        self.check(t)?;
        if !(tau > 0.0) {
            return Err(Error::InvalidConfig(format!("tau must be positive, got {tau}")));
        }
        let sum: f64 = self
            .eigenvalues
            .iter()
            .zip(&self.eigenfunctions)
            .map(|(b, psi)| (b / unit).powf(2.0 * tau) * (psi[s] - psi[t]).powi(2))
            .sum();
        Ok(sum.sqrt())
    }

    /// All pairwise distances `D_tau(s, t)`.
    pub fn distance_matrix(&self, tau: f64) -> Result<DMatrix<f64>> {
        let n = self.alpha.len();
        let mut out = DMatrix::zeros(n, n);
        for s in 0..n {
            for t in (s + 1)..n {
                let d = self.distance(tau, s, t)?;
                out[(s, t)] = d;
                out[(t, s)] = d;
            }
        }
        Ok(out)
    }
}

pub fn diffusion_distance(povm: &DiscretePovm, tau: f64, s: usize, t: usize) -> Result<f64> {
    diffusion_spectrum(povm, DEFAULT_THRESHOLD)?.distance(tau, s, t)
}
