//! Repeated measurement: outcome sampling, Lüders state reduction and
//! trajectory ensembles.
//!
//! Each trajectory `i` of a run with seed `s` draws from its own ChaCha8
//! stream ([`rng::trajectory`]), so ensembles are reproducible regardless
//! of how trajectories are scheduled across threads. Aggregates are summed
//! in trajectory order.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::HermitianBasis;
use crate::error::{Error, Result};
use crate::operator::{maximally_mixed, sqrt_psd, DensityOperator, HermitianOperator};
use crate::povm::{channel_matrix, spectral_gap, DiscretePovm};
use crate::rng;

/// Outcomes with probability below this are never sampled.
const ZERO_PROB: f64 = 1e-14;
/// Largest tolerated `|1 - sum_s p_s|`.
const DEFICIT_TOL: f64 = 1e-8;
const NEGATIVE_TOL: f64 = 1e-9;
/// Slack added to the Monte Carlo bound so exact agreement up to roundoff passes.
const ROUNDOFF_SLACK: f64 = 1e-12;

/// Outcome distribution `p_s = n alpha_s ((F_s, rho))`.
pub fn outcome_probabilities(povm: &DiscretePovm, rho: &DensityOperator) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            found: rho.dim(),
        });
    }
    let n = povm.dim() as f64;
    let mut p = Vec::with_capacity(povm.len());
    for (index, o) in povm.outcomes().iter().enumerate() {
        let value = n * o.alpha * o.state.op().hs_inner_unchecked(rho.op());
        if value < -NEGATIVE_TOL {
            return Err(Error::NegativeProbability { index, value });
        }
        p.push(if value < ZERO_PROB { 0.0 } else { value });
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > DEFICIT_TOL {
        return Err(Error::ProbabilityDeficit { total });
    }
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

/// Draws an outcome index from `mu_rho`.
pub fn sample_outcome<R: Rng + ?Sized>(
    povm: &DiscretePovm,
    rho: &DensityOperator,
    rng: &mut R,
) -> Result<usize> {
    let p = outcome_probabilities(povm, rho)?;
    Ok(sample_categorical(&p, rng))
}

fn sample_categorical<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (s, &ps) in p.iter().enumerate() {
        if ps == 0.0 {
            continue;
        }
        acc += ps;
        last = s;
        if u < acc {
            return s;
        }
    }
    last
}

/// Lüders update `F_s^{1/2} rho F_s^{1/2} / ((F_s, rho))`.
pub fn luders_update(povm: &DiscretePovm, rho: &DensityOperator, s: usize) -> Result<DensityOperator> {
    Instrument::new(povm)?.update(rho, s)
}

/// A POVM with cached square roots `F_s^{1/2}`, for repeated updates.
#[derive(Debug, Clone)]
pub struct Instrument<'a> {
    povm: &'a DiscretePovm,
    roots: Vec<HermitianOperator>,
}

impl<'a> Instrument<'a> {
    pub fn new(povm: &'a DiscretePovm) -> Result<Self> {
        let roots = if povm.is_pure() {
            // A rank-one projector is its own square root.
            povm.outcomes().iter().map(|o| o.state.op().clone()).collect()
        } else {
            povm.outcomes()
                .iter()
                .map(|o| sqrt_psd(o.state.op()))
                .collect::<Result<_>>()?
        };
        Ok(Self { povm, roots })
    }

    pub fn povm(&self) -> &DiscretePovm {
        self.povm
    }

    pub fn update(&self, rho: &DensityOperator, s: usize) -> Result<DensityOperator> {
        if s >= self.povm.len() {
            return Err(Error::InvalidIndex {
                index: s,
                len: self.povm.len(),
            });
        }
        let f = self.povm.state(s);
        let denom = f.hs_inner(rho.op())?;
        if denom <= 1e-12 {
            return Err(Error::VanishingProbability { index: s });
        }
        if self.povm.is_pure() {
            // P rho P = ((P, rho)) P for a rank-one projector P.
            return Ok(self.povm.outcomes()[s].state.clone());
        }
        let post = rho.op().sandwich(&self.roots[s])?.scale(1.0 / denom);
        Ok(DensityOperator::new_unchecked(post))
    }

    /// One measurement: sample an outcome, then reduce the state.
    pub fn step<R: Rng + ?Sized>(
        &self,
        rho: &DensityOperator,
        rng: &mut R,
    ) -> Result<(usize, DensityOperator)> {
        let s = sample_outcome(self.povm, rho, rng)?;
        Ok((s, self.update(rho, s)?))
    }
}

/// Seed and ensemble size of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub steps: usize,
    pub trajectories: usize,
}

impl SimConfig {
    pub fn new(seed: u64, steps: usize, trajectories: usize) -> Result<Self> {
        if trajectories == 0 {
            return Err(Error::InvalidConfig("at least one trajectory is required".into()));
        }
        Ok(Self {
            seed,
            steps,
            trajectories,
        })
    }
}

/// One realization `(rho_0; s_1, rho_1; ...; s_k, rho_k)`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial: DensityOperator,
    pub readings: Vec<usize>,
    pub states: Vec<DensityOperator>,
}

impl Trajectory {
    /// State after `step` measurements (`0` is the initial state).
    pub fn state_at(&self, step: usize) -> &DensityOperator {
        if step == 0 {
            &self.initial
        } else {
            &self.states[step - 1]
        }
    }
}

fn run_one(instrument: &Instrument<'_>, rho0: &DensityOperator, steps: usize, seed: u64, index: u64) -> Result<Trajectory> {
    let mut rng = rng::trajectory(seed, index);
    let mut readings = Vec::with_capacity(steps);
    let mut states = Vec::with_capacity(steps);
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let (s, next) = instrument.step(&rho, &mut rng)?;
        readings.push(s);
        states.push(next.clone());
        rho = next;
    }
    Ok(Trajectory {
        initial: rho0.clone(),
        readings,
        states,
    })
}

/// Runs `config.trajectories` independent chains of `config.steps` measurements.
pub fn run_chain(povm: &DiscretePovm, rho0: &DensityOperator, config: &SimConfig) -> Result<Vec<Trajectory>> {
    if rho0.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            found: rho0.dim(),
        });
    }
    let instrument = Instrument::new(povm)?;
    (0..config.trajectories as u64)
        .into_par_iter()
        .map(|i| run_one(&instrument, rho0, config.steps, config.seed, i))
        .collect()
}

/// Mean state and its standard error at one step of an ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct StepStat {
    pub step: usize,
    /// `||mean(rho_i) - theta_0||_HS`.
    pub mean_distance: f64,
    /// Standard error of the ensemble mean in HS norm,
    /// `sqrt(sum_a var_a / m)` over orthonormal coordinates.
    pub stderr: f64,
}

/// Ensemble mean and HS-norm standard error of a set of states (two-pass).
fn mean_and_stderr<'a>(states: impl Iterator<Item = &'a DensityOperator>, dim: usize) -> (HermitianOperator, f64) {
    let basis = HermitianBasis::new(dim);
    let coords: Vec<Vec<f64>> = states.map(|rho| basis.coords(rho.op())).collect();
    let m = coords.len() as f64;
    let mut mean = vec![0.0; basis.len()];
    for c in &coords {
        for (mu, x) in mean.iter_mut().zip(c) {
            *mu += x;
        }
    }
    mean.iter_mut().for_each(|mu| *mu /= m);
    let var_total = if coords.len() > 1 {
        let ss: f64 = coords
            .iter()
            .map(|c| c.iter().zip(&mean).map(|(x, mu)| (x - mu).powi(2)).sum::<f64>())
            .sum();
        ss / (m - 1.0)
    } else {
        0.0
    };
    (basis.from_coords(&mean), (var_total / m).sqrt())
}

/// Per-step distance of the ensemble mean from the maximally mixed state.
pub fn ensemble_statistics(trajectories: &[Trajectory]) -> Result<Vec<StepStat>> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::InvalidConfig("empty ensemble".into()))?;
    let dim = first.initial.dim();
    let steps = first.states.len();
    let theta = maximally_mixed(dim)?;
    (0..=steps)
        .map(|i| {
            let (mean, stderr) = mean_and_stderr(trajectories.iter().map(|t| t.state_at(i)), dim);
            Ok(StepStat {
                step: i,
                mean_distance: mean.hs_distance(theta.op())?,
                stderr,
            })
        })
        .collect()
}

/// Outcome of the one-step check `E(rho_1) = E(rho_0)` (the channel image).
#[derive(Debug, Clone, Serialize)]
pub struct OneStepCheck {
    pub empirical_mean: HermitianOperator,
    pub channel_image: HermitianOperator,
    pub discrepancy: f64,
    /// Three standard errors of the ensemble mean in HS norm.
    pub bound: f64,
    pub pass: bool,
}

/// Compares the empirical mean of `rho_1` over `m` samples with the channel image of `rho0`.
pub fn one_step_expectation_check(
    povm: &DiscretePovm,
    rho0: &DensityOperator,
    m: usize,
    seed: u64,
) -> Result<OneStepCheck> {
    let config = SimConfig::new(seed, 1, m)?;
    let instrument = Instrument::new(povm)?;
    let states: Vec<DensityOperator> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::trajectory(config.seed, i);
            instrument.step(rho0, &mut rng).map(|(_, rho)| rho)
        })
        .collect::<Result<_>>()?;
    let (empirical_mean, stderr) = mean_and_stderr(states.iter(), povm.dim());
    let channel_image = channel_matrix(povm).apply(rho0.op());
    let discrepancy = empirical_mean.hs_distance(&channel_image)?;
    let bound = 3.0 * stderr;
    Ok(OneStepCheck {
        empirical_mean,
        channel_image,
        discrepancy,
        bound,
        pass: discrepancy <= bound + ROUNDOFF_SLACK,
    })
}

/// `||E^i(rho0) - theta_0||_HS` for `i = 0..=steps`.
///
/// Iterates on `rho0 - theta_0`, which the unital channel maps to
/// `E^i(rho0) - theta_0`, so relative precision is kept as the distance
/// decays.
pub fn channel_iterates(povm: &DiscretePovm, rho0: &DensityOperator, steps: usize) -> Result<Vec<f64>> {
    let theta = maximally_mixed(povm.dim())?;
    let e = channel_matrix(povm);
    let diff = rho0.op().sub(theta.op())?;
    let mut x = DVector::from_vec(e.basis().coords(&diff));
    x[0] = 0.0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x.norm());
    for _ in 0..steps {
        x = e.matrix() * x;
        out.push(x.norm());
    }
    Ok(out)
}

/// Which steps enter a log-linear fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitWindow {
    /// Steps `0..burn_in` are skipped.
    pub burn_in: usize,
    /// Distances below this are skipped.
    pub floor: f64,
    /// The fit stops at the first step whose distance is below
    /// `noise_sigmas` standard errors (0 disables the cut).
    pub noise_sigmas: f64,
}

impl FitWindow {
    /// Exact channel iterates: skip two transient steps and the roundoff floor.
    pub const DETERMINISTIC: FitWindow = FitWindow {
        burn_in: 2,
        floor: 1e-12,
        noise_sigmas: 0.0,
    };
    /// Monte Carlo ensembles: step 0 is exact, later steps are kept while
    /// the signal exceeds three standard errors.
    pub const ENSEMBLE: FitWindow = FitWindow {
        burn_in: 0,
        floor: 1e-12,
        noise_sigmas: 3.0,
    };
}

/// Least-squares slope of `log d_i` against `i`.
#[derive(Debug, Clone, Serialize)]
pub struct LogFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub points: usize,
}

/// Weighted least squares on `log d_i` with weights `1/var(log d_i)`,
/// `var(log d_i) ~ (se_i/d_i)^2 + 1e-12`. With all standard errors zero this
/// is ordinary least squares.
pub fn fit_log_slope(distances: &[f64], stderrs: &[f64], window: FitWindow) -> Option<LogFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for (i, (&d, &se)) in distances.iter().zip(stderrs).enumerate() {
        if window.noise_sigmas > 0.0 && d < window.noise_sigmas * se {
            break;
        }
        if i < window.burn_in || d < window.floor {
            continue;
        }
        let rel = se / d;
        xs.push(i as f64);
        ys.push(d.ln());
        ws.push(1.0 / (rel * rel + 1e-12));
    }
    if xs.len() < 2 {
        return None;
    }
    let wsum: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let ybar = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&ws)
        .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let all_exact = stderrs.iter().all(|s| *s == 0.0);
    let slope_stderr = if all_exact {
        if xs.len() > 2 {
            let rss: f64 = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| (y - ybar - slope * (x - xbar)).powi(2))
                .sum();
            // Uniform weights: rescale to the unweighted sum of squares.
            (rss / (xs.len() - 2) as f64 / (sxx / ws[0])).sqrt()
        } else {
            0.0
        }
    } else {
        (1.0 / sxx).sqrt()
    };
    Some(LogFit {
        slope,
        slope_stderr,
        points: xs.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub gamma: f64,
    /// `1 - gamma`.
    pub predicted_rate: f64,
    /// `ln(1 - gamma)`, absent when `gamma = 1`.
    pub predicted_log_rate: Option<f64>,
    /// Whether the convergence claim applies (pure POVM).
    pub pure: bool,
    /// Second channel eigenvalue simple and at least 0.05 above the third.
    pub separated_second_eigenvalue: bool,
    pub deterministic_distances: Vec<f64>,
    pub deterministic_fit: Option<LogFit>,
    pub ensemble: Vec<StepStat>,
    pub ensemble_fit: Option<LogFit>,
}

impl ConvergenceReport {
    /// `step,mean_distance,stderr` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,mean_distance,stderr\n");
        for s in &self.ensemble {
            out.push_str(&format!("{},{:.16e},{:.16e}\n", s.step, s.mean_distance, s.stderr));
        }
        out
    }
}

/// Compares the decay of `||E(rho_i) - theta_0||` with `(1 - gamma)^i`, both
/// by exact channel iteration and by a Monte Carlo ensemble.
pub fn convergence_rate(povm: &DiscretePovm, rho0: &DensityOperator, config: &SimConfig) -> Result<ConvergenceReport> {
    let gap = spectral_gap(povm)?;
    if gap.gamma < 1e-12 {
        return Err(Error::NoSpectralGap);
    }
    let e = &gap.spectrum_e;
    let separated = e.len() >= 2
        && (e.len() == 2 || e[1] - e.get(2).copied().unwrap_or(0.0) >= 0.05);
    let deterministic_distances = channel_iterates(povm, rho0, config.steps)?;
    let zeros = vec![0.0; deterministic_distances.len()];
    let deterministic_fit = fit_log_slope(&deterministic_distances, &zeros, FitWindow::DETERMINISTIC);

    let trajectories = run_chain(povm, rho0, config)?;
    let ensemble = ensemble_statistics(&trajectories)?;
    let d: Vec<f64> = ensemble.iter().map(|s| s.mean_distance).collect();
    let se: Vec<f64> = ensemble.iter().map(|s| s.stderr).collect();
    let ensemble_fit = fit_log_slope(&d, &se, FitWindow::ENSEMBLE);

    let predicted_rate = 1.0 - gap.gamma;
    Ok(ConvergenceReport {
        gamma: gap.gamma,
        predicted_rate,
        predicted_log_rate: (predicted_rate > 0.0).then(|| predicted_rate.ln()),
        pure: povm.is_pure(),
        separated_second_eigenvalue: separated,
        deterministic_distances,
        deterministic_fit,
        ensemble,
        ensemble_fit,
    })
}
