//! POVMs as weighted clouds of states: best-fit line, geometric gap,
//! diffusion coordinates and Wasserstein distance.

mod diffusion;
mod robustness;
mod transport;

pub use diffusion::{diffusion_distance, diffusion_spectrum, psi1, DiffusionSpectrum, DEFAULT_THRESHOLD};
pub use robustness::{lipschitz_lemmas, robustness_check, LipschitzReport, RobustnessReport, StateBound, STATE_DIAMETER};
pub use transport::{cost_matrix, transport, wasserstein, TransportPlan, TransportSolution};

use serde::{Deserialize, Serialize};

use crate::basis::HermitianBasis;
use crate::error::{Error, Result};
use crate::operator::{eigh_real, HermitianOperator};
use crate::povm::DiscretePovm;

/// Points closer than this in HS distance are identified by [`cloud_from_povm`].
pub const MERGE_TOL: f64 = 1e-9;
const WEIGHT_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
/// Covariance eigenvalues closer than this to `K` make the best-fit line ambiguous.
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub weight: f64,
    pub point: HermitianOperator,
}

/// A finitely supported probability measure on trace-one Hermitian operators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateCloud {
    dim: usize,
    points: Vec<CloudPoint>,
}

impl StateCloud {
    pub fn new(dim: usize, points: Vec<CloudPoint>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut total = 0.0;
        for (index, p) in points.iter().enumerate() {
            if p.point.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.point.dim(),
                });
            }
            if !(p.weight > 0.0) {
                return Err(Error::NonPositiveWeight { index, alpha: p.weight });
            }
            let trace = p.point.trace();
            if (trace - 1.0).abs() > TRACE_TOL {
                return Err(Error::TraceNotOne { trace });
            }
            total += p.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Normalization {
                what: "cloud weights",
                defect: (total - 1.0).abs(),
            });
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[CloudPoint] {
        &self.points
    }

    pub fn weights(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.weight).collect()
    }
}

impl<'de> Deserialize<'de> for StateCloud {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dim: usize,
            points: Vec<CloudPoint>,
        }
        let raw = Raw::deserialize(d)?;
        StateCloud::new(raw.dim, raw.points).map_err(serde::de::Error::custom)
    }
}

/// Pushforward `F_* alpha`: one point per distinct state, weights added.
pub fn cloud_from_povm(povm: &DiscretePovm) -> StateCloud {
    let mut points: Vec<CloudPoint> = Vec::with_capacity(povm.len());
    for o in povm.outcomes() {
        let state = o.state.op();
        match points
            .iter_mut()
            .find(|p| p.point.hs_distance(state).is_ok_and(|d| d <= MERGE_TOL))
        {
            Some(p) => p.weight += o.alpha,
            None => points.push(CloudPoint {
                weight: o.alpha,
                point: state.clone(),
            }),
        }
    }
    StateCloud {
        dim: povm.dim(),
        points,
    }
}

/// Center of mass, spread and best-fitting line of a cloud.
#[derive(Debug, Clone, Serialize)]
pub struct BestFitResult {
    pub center: HermitianOperator,
    /// Mean squared HS distance to the center.
    pub i: f64,
    /// Mean squared HS distance to the best-fitting line.
    pub j: f64,
    /// Top eigenvalue of the covariance on traceless operators, `I - J`.
    pub k: f64,
    /// Unit traceless direction of the line; absent when `n = 1`.
    pub direction: Option<HermitianOperator>,
    /// Whether the top covariance eigenvalue is repeated.
    pub degenerate: bool,
}

/// Covariance of the traceless coordinates of the cloud.
pub fn best_fit(cloud: &StateCloud) -> Result<BestFitResult> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let basis = HermitianBasis::new(cloud.dim);
    let coords: Vec<Vec<f64>> = cloud.points.iter().map(|p| basis.coords(&p.point)).collect();
    let len = basis.len();
    let mut mean = vec![0.0; len];
    for (p, c) in cloud.points.iter().zip(&coords) {
        for (m, x) in mean.iter_mut().zip(c) {
            *m += p.weight * x;
        }
    }
    let center = basis.from_coords(&mean);
    let traceless = len - 1;
    let mut cov = nalgebra::DMatrix::<f64>::zeros(traceless, traceless);
    for (p, c) in cloud.points.iter().zip(&coords) {
        let d = nalgebra::DVector::from_iterator(traceless, (1..len).map(|a| c[a] - mean[a]));
        cov += p.weight * &d * d.transpose();
    }
    let i: f64 = cov.trace();
    if traceless == 0 {
        return Ok(BestFitResult {
            center,
            i: 0.0,
            j: 0.0,
            k: 0.0,
            direction: None,
            degenerate: false,
        });
    }
    let (values, vectors) = eigh_real(&cov)?;
    let k = values[0].max(0.0);
    let degenerate = values.len() > 1 && values[0] - values[1] <= DEGENERACY_TOL;
    let mut a = vec![0.0; len];
    a[1..].copy_from_slice(vectors.column(0).as_slice());
    // Orient so that the first point with a visible projection lies on the positive side.
    let projections = coords.iter().map(|c| (1..len).map(|x| (c[x] - mean[x]) * a[x]).sum::<f64>());
    if let Some(first) = projections.into_iter().find(|x| x.abs() > 1e-9) {
        if first < 0.0 {
            a.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(BestFitResult {
        center,
        i,
        j: (i - k).max(0.0),
        k,
        direction: Some(basis.from_coords(&a)),
        degenerate,
    })
}

/// `1 - n K` of the POVM's cloud.
pub fn gap_from_geometry(povm: &DiscretePovm) -> Result<f64> {
    let fit = best_fit(&cloud_from_povm(povm))?;
    Ok(1.0 - povm.dim() as f64 * fit.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{projective, random_povm, sic_qubit, single_outcome, RandomKind};
    use crate::operator::{bloch_state, maximally_mixed};
    use crate::povm::{spectral_gap, Outcome};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn sic_cloud() {
        let cloud = cloud_from_povm(&sic_qubit());
        assert_eq!(cloud.len(), 4);
        for i in 0..4 {
            assert_abs_diff_eq!(cloud.points()[i].weight, 0.25);
            for j in 0..i {
                let d = cloud.points()[i].point.hs_distance(&cloud.points()[j].point).unwrap();
                assert_abs_diff_eq!(d * d, 4.0 / 3.0, epsilon = 1e-14);
            }
        }
        let fit = best_fit(&cloud).unwrap();
        assert_abs_diff_eq!(fit.i, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.k, 1.0 / 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.j, 1.0 / 3.0, epsilon = 1e-14);
        assert!(fit.degenerate);
        assert!(fit.center.max_abs_diff(maximally_mixed(2).unwrap().op()) < 1e-14);
    }

    #[test]
    fn duplicate_states_merge() {
        let povm = projective(2);
        let doubled = DiscretePovm::new(
            2,
            vec![
                Outcome::new("a", 0.25, povm.outcomes()[0].state.clone()),
                Outcome::new("b", 0.25, povm.outcomes()[0].state.clone()),
                Outcome::new("c", 0.5, povm.outcomes()[1].state.clone()),
            ],
        )
        .unwrap();
        let cloud = cloud_from_povm(&doubled);
        assert_eq!(cloud.len(), 2);
        assert_abs_diff_eq!(cloud.points()[0].weight, 0.5);
    }

    #[test]
    fn small_clouds() {
        let p = bloch_state([0.0, 0.0, 1.0]);
        let q = bloch_state([0.6, 0.0, -0.8]);
        let one = StateCloud::new(2, vec![CloudPoint { weight: 1.0, point: p.clone() }]).unwrap();
        let fit = best_fit(&one).unwrap();
        assert_eq!((fit.i, fit.j, fit.k), (0.0, 0.0, 0.0));
        assert!(fit.direction.is_some());

        let two = StateCloud::new(
            2,
            vec![
                CloudPoint { weight: 0.5, point: p.clone() },
                CloudPoint { weight: 0.5, point: q.clone() },
            ],
        )
        .unwrap();
        let fit = best_fit(&two).unwrap();
        let d2 = p.hs_distance(&q).unwrap().powi(2);
        assert_abs_diff_eq!(fit.i, d2 / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.k, fit.i, epsilon = 1e-14);
        assert!(fit.j < 1e-14);
        let a = fit.direction.unwrap();
        assert!(a.trace().abs() < 1e-12);
        assert_abs_diff_eq!(a.hs_norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cloud_validation() {
        let p = bloch_state([0.0, 0.0, 1.0]);
        assert_eq!(StateCloud::new(2, vec![]).unwrap_err(), Error::EmptyCloud);
        assert!(matches!(
            StateCloud::new(2, vec![CloudPoint { weight: 0.5, point: p.clone() }]),
            Err(Error::Normalization { .. })
        ));
        assert!(matches!(
            StateCloud::new(2, vec![CloudPoint { weight: 1.0, point: p.scale(2.0) }]),
            Err(Error::TraceNotOne { .. })
        ));
    }

    #[test]
    fn geometric_gap_examples() {
        assert_abs_diff_eq!(gap_from_geometry(&sic_qubit()).unwrap(), 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gap_from_geometry(&projective(2)).unwrap(), 0.0, epsilon = 1e-14);
        assert_eq!(gap_from_geometry(&single_outcome(3)).unwrap(), 1.0);
        assert_eq!(gap_from_geometry(&single_outcome(1)).unwrap(), 1.0);
    }

    #[test]
    fn geometric_gap_matches_spectral() {
        for seed in 0..30 {
            let n = 2 + (seed as usize % 3);
            let kind = if seed % 2 == 0 { RandomKind::Pure } else { RandomKind::Mixed };
            let povm = random_povm(n, n + 1 + seed as usize % 5, seed, kind).unwrap();
            let g = gap_from_geometry(&povm).unwrap();
            assert_abs_diff_eq!(g, spectral_gap(&povm).unwrap().gamma, epsilon = 1e-8);
        }
    }

    #[test]
    fn best_fit_is_maximal() {
        let povm = random_povm(3, 7, 21, RandomKind::Mixed).unwrap();
        let cloud = cloud_from_povm(&povm);
        let fit = best_fit(&cloud).unwrap();
        let basis = HermitianBasis::new(3);
        let mut rng = crate::rng::stream(3, 0);
        for _ in 0..100 {
            let mut c: Vec<f64> = (0..9).map(|_| rng.sample(StandardNormal)).collect();
            c[0] = 0.0;
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            let a = basis.from_coords(&c.iter().map(|x| x / norm).collect::<Vec<_>>());
            let spread: f64 = cloud
                .points()
                .iter()
                .map(|p| p.weight * p.point.sub(&fit.center).unwrap().hs_inner(&a).unwrap().powi(2))
                .sum();
            assert!(spread <= fit.k + 1e-10);
        }
    }
}
