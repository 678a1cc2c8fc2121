//! POVMs with a density: `dW(s) = n F(s) dalpha(s)` on a finite outcome set.
//!
//! A [`DiscretePovm`] stores the probability weights `alpha_s` and the states
//! `F_s`; the effects are `W_s = n alpha_s F_s`. Continuous outcome spaces
//! enter through quadrature (see [`crate::berezin`]).

mod bottleneck;
pub(crate) mod noise;
mod spectral;

pub use bottleneck::{bottleneck, kappa, BottleneckMode, BottleneckReport, Sandwich, EXACT_MAX_OUTCOMES};
pub use noise::{minimal_noise, noise_operator, noise_ratio, MinimalNoise};
pub use spectral::{
    channel_matrix, markov_matrix, spectral_gap, GapReport, MarkovMatrix, SuperoperatorMatrix,
    POSITIVE_EIGEN_TOL,
};

use nalgebra::DMatrix;

use crate::basis::HermitianBasis;
use crate::error::{Error, Result};
use crate::operator::{eigh, DensityOperator, HermitianOperator, CLAMP_TOL};

/// Default tolerance on `||sum_s n alpha_s F_s - Id||_HS`.
pub const NORMALIZATION_TOL: f64 = 1e-8;
/// Tolerance on `sum_s alpha_s = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;
/// Rank-one test: `tr(F^2) >= 1 - PURITY_TOL`.
pub const PURITY_TOL: f64 = 1e-9;
/// Two states closer than this in HS distance count as equal.
pub const DISTINCT_TOL: f64 = 1e-9;

/// One outcome of a discrete POVM.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub label: String,
    pub alpha: f64,
    pub state: DensityOperator,
}

impl Outcome {
    pub fn new(label: impl Into<String>, alpha: f64, state: DensityOperator) -> Self {
        Self {
            label: label.into(),
            alpha,
            state,
        }
    }
}

/// A POVM on a finite outcome set in density form.
#[derive(Debug, Clone)]
pub struct DiscretePovm {
    dim: usize,
    outcomes: Vec<Outcome>,
    pure: bool,
}

impl DiscretePovm {
    /// Validates with the default normalization tolerance.
    pub fn new(dim: usize, outcomes: Vec<Outcome>) -> Result<Self> {
        Self::with_tolerance(dim, outcomes, NORMALIZATION_TOL)
    }

    pub fn with_tolerance(dim: usize, outcomes: Vec<Outcome>, tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if outcomes.is_empty() {
            return Err(Error::NoOutcomes);
        }
        for (index, o) in outcomes.iter().enumerate() {
            if o.state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: o.state.dim(),
                });
            }
            if !(o.alpha > 0.0) || !o.alpha.is_finite() {
                return Err(Error::NonPositiveWeight {
                    index,
                    alpha: o.alpha,
                });
            }
        }
        let total: f64 = outcomes.iter().map(|o| o.alpha).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Normalization {
                what: "sum of weights",
                defect: total - 1.0,
            });
        }
        let mut povm = Self {
            dim,
            outcomes,
            pure: false,
        };
        let defect = povm.normalization_defect();
        if defect > tol {
            return Err(Error::Normalization {
                what: "resolution of identity",
                defect,
            });
        }
        povm.pure = povm.detect_purity();
        Ok(povm)
    }

    fn detect_purity(&self) -> bool {
        if !self
            .outcomes
            .iter()
            .all(|o| o.state.purity() >= 1.0 - PURITY_TOL)
        {
            return false;
        }
        let coords = self.coordinate_matrix();
        let n = self.len();
        for s in 0..n {
            for t in (s + 1)..n {
                let d2 = (coords.row(s) - coords.row(t)).norm_squared();
                if d2.sqrt() <= DISTINCT_TOL {
                    return false;
                }
            }
        }
        true
    }

    /// `||sum_s n alpha_s F_s - Id||_HS`.
    pub fn normalization_defect(&self) -> f64 {
        let total = self.effect_sum();
        total
            .sub(&HermitianOperator::identity(self.dim))
            .map(|d| d.hs_norm())
            .unwrap_or(f64::INFINITY)
    }

    fn effect_sum(&self) -> HermitianOperator {
        let mut total = HermitianOperator::zeros(self.dim);
        let n = self.dim as f64;
        for o in &self.outcomes {
            total.axpy(n * o.alpha, o.state.op());
        }
        total
    }

    /// Hilbert space dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of outcomes `N`.
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.alpha).collect()
    }

    pub fn state(&self, s: usize) -> &HermitianOperator {
        self.outcomes[s].state.op()
    }

    /// Whether every `F_s` is a rank-one projector and `F` is injective.
    pub fn is_pure(&self) -> bool {
        self.pure
    }

    /// Effect `W_s = n alpha_s F_s`.
    pub fn effect(&self, s: usize) -> HermitianOperator {
        self.state(s).scale(self.dim as f64 * self.outcomes[s].alpha)
    }

    /// Rows are the Gell-Mann coordinates of `F_s` (an `N x n^2` matrix).
    pub fn coordinate_matrix(&self) -> DMatrix<f64> {
        let basis = HermitianBasis::new(self.dim);
        let n2 = basis.len();
        let mut g = DMatrix::zeros(self.len(), n2);
        for (s, o) in self.outcomes.iter().enumerate() {
            let c = basis.coords(o.state.op());
            for (a, v) in c.into_iter().enumerate() {
                g[(s, a)] = v;
            }
        }
        g
    }

    /// Gram matrix `((F_s, F_t))`.
    pub fn gram(&self) -> DMatrix<f64> {
        let g = self.coordinate_matrix();
        &g * g.transpose()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            Err(Error::LengthMismatch {
                expected: self.len(),
                found: len,
            })
        } else {
            Ok(())
        }
    }
}

/// Builds a POVM from effects `W_i`: `alpha_i = tr(W_i)/n`, `F_i = W_i/tr(W_i)`.
///
/// Weights are renormalized to sum to one exactly; the effects themselves
/// must resolve the identity within `tol`.
pub fn from_effects(effects: &[HermitianOperator], tol: f64) -> Result<DiscretePovm> {
    let first = effects.first().ok_or(Error::NoOutcomes)?;
    let dim = first.dim();
    let mut total = HermitianOperator::zeros(dim);
    for (index, w) in effects.iter().enumerate() {
        if w.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: w.dim(),
            });
        }
        let min = eigh(w)?.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -CLAMP_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let trace = w.trace();
        if trace <= 1e-12 {
            return Err(Error::VanishingEffect { index, trace });
        }
        total.axpy(1.0, w);
    }
    let defect = total.sub(&HermitianOperator::identity(dim))?.hs_norm();
    if defect > tol {
        return Err(Error::Normalization {
            what: "sum of effects",
            defect,
        });
    }
    let n = dim as f64;
    let raw: Vec<f64> = effects.iter().map(|w| w.trace() / n).collect();
    let sum: f64 = raw.iter().sum();
    let outcomes = effects
        .iter()
        .zip(raw)
        .enumerate()
        .map(|(i, (w, a))| {
            let state = DensityOperator::new(w.scale(1.0 / w.trace()))?;
            Ok(Outcome::new(i.to_string(), a / sum, state))
        })
        .collect::<Result<Vec<_>>>()?;
    DiscretePovm::with_tolerance(dim, outcomes, tol)
}

/// `T(phi) = sum_s phi_s n alpha_s F_s`.
pub fn toeplitz(povm: &DiscretePovm, phi: &[f64]) -> Result<HermitianOperator> {
    povm.check_len(phi.len())?;
    let n = povm.dim() as f64;
    let mut out = HermitianOperator::zeros(povm.dim());
    for (o, p) in povm.outcomes().iter().zip(phi) {
        out.axpy(p * n * o.alpha, o.state.op());
    }
    Ok(out)
}

/// `T*(A)(s) = n ((F_s, A))`.
pub fn dual(povm: &DiscretePovm, a: &HermitianOperator) -> Result<Vec<f64>> {
    if a.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            found: a.dim(),
        });
    }
    let n = povm.dim() as f64;
    Ok(povm
        .outcomes()
        .iter()
        .map(|o| n * o.state.op().hs_inner_unchecked(a))
        .collect())
}
