//! Noise operator `Delta_W(phi) = T(phi^2) - T(phi)^2` and minimal noise.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::spectral::symmetric_markov;
use super::{toeplitz, DiscretePovm};
use crate::error::{Error, Result};
use crate::operator::{eigh_real, HermitianOperator};

pub fn noise_operator(povm: &DiscretePovm, phi: &[f64]) -> Result<HermitianOperator> {
    povm.check_len(phi.len())?;
    let squared: Vec<f64> = phi.iter().map(|x| x * x).collect();
    let t2 = toeplitz(povm, &squared)?;
    let t = toeplitz(povm, phi)?;
    t2.sub(&t.square())
}

/// Noise-to-variance ratio at the maximally mixed state,
/// `((Delta_W(phi), theta_0)) / Var(phi, mu_theta_0)`.
///
/// Evaluated from the noise operator itself, not from the Markov operator.
/// Returns `None` for functions that are constant on the support.
pub fn noise_ratio(povm: &DiscretePovm, phi: &[f64]) -> Result<Option<f64>> {
    let delta = noise_operator(povm, phi)?;
    let noise = delta.trace() / povm.dim() as f64;
    let alpha = povm.alphas();
    let mean: f64 = alpha.iter().zip(phi).map(|(a, x)| a * x).sum();
    let second: f64 = alpha.iter().zip(phi).map(|(a, x)| a * x * x).sum();
    let var = second - mean * mean;
    if var <= 1e-14 * second.max(1e-300) {
        return Ok(None);
    }
    Ok(Some(noise / var))
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimalNoise {
    pub value: f64,
    /// Minimizing function, mean zero with unit `L^2(alpha)` norm.
    pub minimizer: Vec<f64>,
}

/// `inf` over non-constant `phi` of the noise-to-variance ratio, computed
/// from the Markov operator restricted to the orthogonal complement of the
/// constants in `L^2(alpha)`.
pub fn minimal_noise(povm: &DiscretePovm) -> Result<MinimalNoise> {
    let size = povm.len();
    if size < 2 {
        return Err(Error::SingleOutcome);
    }
    let (values, vectors) = restricted_markov_eigen(povm)?;
    let top = values[0];
    let v = vectors.column(0);
    let alpha = povm.alphas();
    let mut minimizer: Vec<f64> = v
        .iter()
        .zip(&alpha)
        .map(|(x, a)| x / a.sqrt())
        .collect();
    fix_sign(&mut minimizer);
    Ok(MinimalNoise {
        value: 1.0 - top,
        minimizer,
    })
}

/// Eigenpairs of `P S P` where `S` is the symmetrized Markov matrix and `P`
/// projects out `sqrt(alpha)`. Descending order; the direction
/// `sqrt(alpha)` itself shows up as a zero eigenvalue.
pub(crate) fn restricted_markov_eigen(povm: &DiscretePovm) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let s = symmetric_markov(povm);
    let u = DVector::from_iterator(povm.len(), povm.alphas().into_iter().map(f64::sqrt));
    let size = povm.len();
    let p = DMatrix::<f64>::identity(size, size) - &u * u.transpose();
    let mut restricted = &p * s * &p;
    for i in 0..size {
        for j in (i + 1)..size {
            let avg = 0.5 * (restricted[(i, j)] + restricted[(j, i)]);
            restricted[(i, j)] = avg;
            restricted[(j, i)] = avg;
        }
    }
    eigh_real(&restricted)
}

/// Makes the first entry with `|x| > 1e-9` positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-9) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}
