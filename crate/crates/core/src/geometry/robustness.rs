use serde::Serialize;

use super::{best_fit, cloud_from_povm, wasserstein, StateCloud};
use crate::error::{Error, Result};
use crate::povm::{spectral_gap, DiscretePovm};

/// Upper bound on the HS diameter of the state space.
pub const STATE_DIAMETER: f64 = 2.0;
const SLACK: f64 = 1e-9;

/// Stability of the gap under Wasserstein perturbation of the state cloud.
#[derive(Debug, Clone, Serialize)]
pub struct RobustnessReport {
    pub gamma_v: f64,
    pub gamma_w: f64,
    pub delta: f64,
    /// `12 n delta`.
    pub bound: f64,
    pub holds: bool,
}

pub fn robustness_check(v: &DiscretePovm, w: &DiscretePovm) -> Result<RobustnessReport> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: w.dim(),
        });
    }
    let gamma_v = spectral_gap(v)?.gamma;
    let gamma_w = spectral_gap(w)?.gamma;
    let (delta, _) = wasserstein(&cloud_from_povm(v), &cloud_from_povm(w))?;
    let bound = 12.0 * v.dim() as f64 * delta;
    Ok(RobustnessReport {
        gamma_v,
        gamma_w,
        delta,
        bound,
        holds: (gamma_v - gamma_w).abs() <= bound + SLACK,
    })
}

/// One inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StateBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl StateBound {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs + SLACK,
        }
    }
}

/// Continuity of `C`, `I` and `J` in the quadratic Wasserstein distance.
#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub delta: f64,
    pub diameter: f64,
    /// `dist(C_a, C_b) <= delta`.
    pub center: StateBound,
    /// `|I_a - I_b| <= 4 D delta`.
    pub spread: StateBound,
    /// `|J_a - J_b| <= 2 D delta`.
    pub residual: StateBound,
}

impl LipschitzReport {
    pub fn holds(&self) -> bool {
        self.center.holds && self.spread.holds && self.residual.holds
    }
}

pub fn lipschitz_lemmas(a: &StateCloud, b: &StateCloud) -> Result<LipschitzReport> {
    let (delta, _) = wasserstein(a, b)?;
    let fa = best_fit(a)?;
    let fb = best_fit(b)?;
    let d = STATE_DIAMETER;
    Ok(LipschitzReport {
        delta,
        diameter: d,
        center: StateBound::new(fa.center.hs_distance(&fb.center)?, delta),
        spread: StateBound::new((fa.i - fb.i).abs(), 4.0 * d * delta),
        residual: StateBound::new((fa.j - fb.j).abs(), 2.0 * d * delta),
    })
}
