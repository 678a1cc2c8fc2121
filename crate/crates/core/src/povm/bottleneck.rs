//! Bottleneck quantity `Upsilon(W) = 1 - sup { kappa(W(Y)) : alpha(Y) <= 1/2 }`
//! with `kappa(B) = tr(B^2)/tr(B)`.
//!
//! For a subset `Y` with `a_s = alpha_s`, `tr W(Y) = n sum_Y a_s` and
//! `tr W(Y)^2 = n^2 sum_{s,t in Y} a_s a_t ((F_s, F_t))`, so
//! `kappa(W(Y)) = n Q(Y) / A(Y)` with `Q` the quadratic form of the Gram
//! matrix. The exact search walks all subsets in Gray-code order and updates
//! `Q` in `O(N)` per step.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{spectral_gap, DiscretePovm};
use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::rng;

/// Largest outcome count accepted by the exact enumeration.
pub const EXACT_MAX_OUTCOMES: usize = 22;
/// Slack on the admissibility constraint `alpha(Y) <= 1/2`.
const HALF_TOL: f64 = 1e-12;
const HEURISTIC_STARTS: usize = 32;
const SANDWICH_TOL: f64 = 1e-9;

/// `kappa(B) = tr(B^2) / tr(B)` for `0 <= B <= Id`.
pub fn kappa(b: &HermitianOperator) -> Result<f64> {
    let trace = b.trace();
    if trace <= 1e-12 {
        return Err(Error::VanishingEffect { index: 0, trace });
    }
    let spectrum = b.eigh()?.eigenvalues;
    let max = spectrum[0];
    let min = *spectrum.last().unwrap();
    if min < -1e-9 || max > 1.0 + 1e-9 {
        return Err(Error::SpectrumOutOfRange { min, max });
    }
    Ok(b.hs_inner_unchecked(b) / trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BottleneckMode {
    /// Enumerate every subset; requires `N <= EXACT_MAX_OUTCOMES`.
    Exact,
    /// Greedy swap local search from seeded random starts. The resulting
    /// `upsilon` is an upper bound on the true value.
    Heuristic { seed: u64 },
}

/// Both sides of `Upsilon^2/2 <= gamma <= 2 Upsilon`.
#[derive(Debug, Clone, Serialize)]
pub struct Sandwich {
    pub gamma: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BottleneckReport {
    pub upsilon: f64,
    /// `sup kappa(W(Y))` over admissible subsets found.
    pub kappa_sup: f64,
    /// Indices of the maximizing subset (empty if none is admissible).
    pub witness: Vec<usize>,
    pub heuristic: bool,
    pub warning: Option<String>,
    /// Present in exact mode only.
    pub sandwich: Option<Sandwich>,
}

struct Subsets {
    weights: Vec<f64>,
    gram: DMatrix<f64>,
    n: f64,
}

impl Subsets {
    fn new(povm: &DiscretePovm) -> Self {
        Self {
            weights: povm.alphas(),
            gram: povm.gram(),
            n: povm.dim() as f64,
        }
    }

    fn kappa_of(&self, set: &[usize]) -> f64 {
        let a: f64 = set.iter().map(|&s| self.weights[s]).sum();
        let mut q = 0.0;
        for &s in set {
            for &t in set {
                q += self.weights[s] * self.weights[t] * self.gram[(s, t)];
            }
        }
        self.n * q / a
    }
}

pub fn bottleneck(povm: &DiscretePovm, mode: BottleneckMode) -> Result<BottleneckReport> {
    let subsets = Subsets::new(povm);
    let (best, witness) = match mode {
        BottleneckMode::Exact => {
            if povm.len() > EXACT_MAX_OUTCOMES {
                return Err(Error::TooManyOutcomes {
                    found: povm.len(),
                    max: EXACT_MAX_OUTCOMES,
                });
            }
            exact_search(&subsets)
        }
        BottleneckMode::Heuristic { seed } => heuristic_search(&subsets, seed),
    };
    let (upsilon, kappa_sup, warning) = match best {
        Some(k) => (1.0 - k, k, None),
        None => (
            1.0,
            0.0,
            Some("no nonempty subset with alpha(Y) <= 1/2; upsilon set to 1".to_string()),
        ),
    };
    let sandwich = if mode == BottleneckMode::Exact {
        let gamma = spectral_gap(povm)?.gamma;
        let lower = upsilon * upsilon / 2.0;
        let upper = 2.0 * upsilon;
        Some(Sandwich {
            gamma,
            lower,
            upper,
            holds: lower <= gamma + SANDWICH_TOL && gamma <= upper + SANDWICH_TOL,
        })
    } else {
        None
    };
    Ok(BottleneckReport {
        upsilon,
        kappa_sup,
        witness,
        heuristic: matches!(mode, BottleneckMode::Heuristic { .. }),
        warning,
        sandwich,
    })
}

fn exact_search(sub: &Subsets) -> (Option<f64>, Vec<usize>) {
    let size = sub.weights.len();
    let a = &sub.weights;
    let g = &sub.gram;
    let mut inside = vec![false; size];
    // row[j] = sum_{t in Y} a_t G_jt
    let mut row = vec![0.0; size];
    let mut q = 0.0;
    let mut total = 0.0;
    let mut count = 0usize;
    let mut best: Option<(f64, u64)> = None;
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << size) {
        let j = step.trailing_zeros() as usize;
        gray ^= 1 << j;
        if inside[j] {
            for (i, r) in row.iter_mut().enumerate() {
                *r -= a[j] * g[(i, j)];
            }
            q -= 2.0 * a[j] * row[j] + a[j] * a[j] * g[(j, j)];
            total -= a[j];
            count -= 1;
        } else {
            q += 2.0 * a[j] * row[j] + a[j] * a[j] * g[(j, j)];
            for (i, r) in row.iter_mut().enumerate() {
                *r += a[j] * g[(i, j)];
            }
            total += a[j];
            count += 1;
        }
        inside[j] = !inside[j];
        if count == 0 || total > 0.5 + HALF_TOL {
            continue;
        }
        let k = sub.n * q / total;
        if best.is_none_or(|(b, _)| k > b) {
            best = Some((k, gray));
        }
    }
    match best {
        Some((_, mask)) => {
            let set: Vec<usize> = (0..size).filter(|i| mask & (1 << i) != 0).collect();
            (Some(sub.kappa_of(&set)), set)
        }
        None => (None, Vec::new()),
    }
}

fn heuristic_search(sub: &Subsets, seed: u64) -> (Option<f64>, Vec<usize>) {
    let size = sub.weights.len();
    let feasible: Vec<usize> = (0..size)
        .filter(|&s| sub.weights[s] <= 0.5 + HALF_TOL)
        .collect();
    if feasible.is_empty() {
        return (None, Vec::new());
    }
    let mut rng = rng::stream(seed, rng::BOTTLENECK_STREAM);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..HEURISTIC_STARTS {
        let mut order = feasible.clone();
        order.shuffle(&mut rng);
        // Random feasible start: a random prefix of a random order, trimmed
        // to satisfy the weight constraint.
        let target = rng.random_range(1..=order.len());
        let mut start = Vec::new();
        let mut w = 0.0;
        for &s in order.iter().take(target) {
            if w + sub.weights[s] <= 0.5 + HALF_TOL {
                start.push(s);
                w += sub.weights[s];
            }
        }
        let set = local_search(sub, start);
        let k = sub.kappa_of(&set);
        if best.as_ref().is_none_or(|(b, _)| k > *b) {
            best = Some((k, set));
        }
    }
    let (k, mut set) = best.expect("at least one start");
    set.sort_unstable();
    (Some(k), set)
}

/// Best-improvement search over add, remove and swap moves.
fn local_search(sub: &Subsets, start: Vec<usize>) -> Vec<usize> {
    let size = sub.weights.len();
    let a = &sub.weights;
    let g = &sub.gram;
    let n = sub.n;
    let mut inside = vec![false; size];
    for &s in &start {
        inside[s] = true;
    }
    let max_iter = 10 * size + 10;
    for _ in 0..max_iter {
        let total: f64 = (0..size).filter(|&s| inside[s]).map(|s| a[s]).sum();
        let row: Vec<f64> = (0..size)
            .map(|i| (0..size).filter(|&t| inside[t]).map(|t| a[t] * g[(i, t)]).sum())
            .collect();
        let q: f64 = (0..size).filter(|&s| inside[s]).map(|s| a[s] * row[s]).sum();
        let current = n * q / total;
        let count = inside.iter().filter(|x| **x).count();
        let mut best_move: Option<(f64, Option<usize>, Option<usize>)> = None;
        let mut consider = |k: f64, add: Option<usize>, remove: Option<usize>| {
            if k > current + 1e-15 && best_move.is_none_or(|(b, _, _)| k > b) {
                best_move = Some((k, add, remove));
            }
        };
        for j in 0..size {
            if inside[j] {
                if count > 1 {
                    let q2 = q - 2.0 * a[j] * row[j] + a[j] * a[j] * g[(j, j)];
                    consider(n * q2 / (total - a[j]), None, Some(j));
                }
            } else if total + a[j] <= 0.5 + HALF_TOL {
                let q2 = q + 2.0 * a[j] * row[j] + a[j] * a[j] * g[(j, j)];
                consider(n * q2 / (total + a[j]), Some(j), None);
            }
        }
        for out in (0..size).filter(|&s| inside[s]) {
            let q_out = q - 2.0 * a[out] * row[out] + a[out] * a[out] * g[(out, out)];
            let total_out = total - a[out];
            for add in (0..size).filter(|&s| !inside[s]) {
                if total_out + a[add] > 0.5 + HALF_TOL {
                    continue;
                }
                let r = row[add] - a[out] * g[(add, out)];
                let q2 = q_out + 2.0 * a[add] * r + a[add] * a[add] * g[(add, add)];
                consider(n * q2 / (total_out + a[add]), Some(add), Some(out));
            }
        }
        match best_move {
            Some((_, add, remove)) => {
                if let Some(j) = add {
                    inside[j] = true;
                }
                if let Some(j) = remove {
                    inside[j] = false;
                }
            }
            None => break,
        }
    }
    (0..size).filter(|&s| inside[s]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{projective, random_povm, sic_qubit, single_outcome, RandomKind};
    use approx::assert_abs_diff_eq;

    /// Direct enumeration with explicit operators, independent of the Gray
    /// code bookkeeping.
    fn brute_force(povm: &DiscretePovm) -> Option<f64> {
        let size = povm.len();
        let mut best: Option<f64> = None;
        for mask in 1u32..(1 << size) {
            let set: Vec<usize> = (0..size).filter(|i| mask & (1 << i) != 0).collect();
            let w: f64 = set.iter().map(|&s| povm.outcomes()[s].alpha).sum();
            if w > 0.5 + 1e-12 {
                continue;
            }
            let mut op = HermitianOperator::zeros(povm.dim());
            for &s in &set {
                op.axpy(1.0, &povm.effect(s));
            }
            let k = kappa(&op).unwrap();
            best = Some(best.map_or(k, |b: f64| b.max(k)));
        }
        best
    }

    #[test]
    fn kappa_examples() {
        let p = HermitianOperator::from_real_diagonal(&[1.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(kappa(&p).unwrap(), 1.0, epsilon = 1e-15);
        let half = HermitianOperator::identity(4).scale(0.5);
        assert_abs_diff_eq!(kappa(&half).unwrap(), 0.5, epsilon = 1e-15);
        let d = HermitianOperator::from_real_diagonal(&[1.0, 0.5]).unwrap();
        assert_abs_diff_eq!(kappa(&d).unwrap(), 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn kappa_errors() {
        assert!(matches!(
            kappa(&HermitianOperator::zeros(2)),
            Err(Error::VanishingEffect { .. })
        ));
        let big = HermitianOperator::from_real_diagonal(&[2.0, 0.0]).unwrap();
        assert!(matches!(kappa(&big), Err(Error::SpectrumOutOfRange { .. })));
    }

    #[test]
    fn projective_qubit() {
        let r = bottleneck(&projective(2), BottleneckMode::Exact).unwrap();
        assert_abs_diff_eq!(r.upsilon, 0.0, epsilon = 1e-14);
        assert_eq!(r.witness.len(), 1);
        assert!(r.sandwich.unwrap().holds);
    }

    #[test]
    fn tetrahedron() {
        let r = bottleneck(&sic_qubit(), BottleneckMode::Exact).unwrap();
        assert_abs_diff_eq!(r.kappa_sup, 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.upsilon, 1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(r.witness.len(), 2);
        let s = r.sandwich.unwrap();
        assert_abs_diff_eq!(s.lower, 1.0 / 18.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.upper, s.gamma, epsilon = 1e-12);
        assert!(s.holds);
    }

    #[test]
    fn single_outcome_convention() {
        let r = bottleneck(&single_outcome(2), BottleneckMode::Exact).unwrap();
        assert_eq!(r.upsilon, 1.0);
        assert!(r.warning.is_some());
        assert!(r.witness.is_empty());
        assert!(r.sandwich.unwrap().holds);
    }

    #[test]
    fn gray_code_matches_brute_force() {
        for seed in 0..10 {
            let povm = random_povm(2 + (seed as usize % 3), 3 + seed as usize % 6, seed, RandomKind::Mixed)
                .unwrap();
            let r = bottleneck(&povm, BottleneckMode::Exact).unwrap();
            let expect = brute_force(&povm).unwrap();
            assert_abs_diff_eq!(r.kappa_sup, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn heuristic_is_one_sided() {
        for seed in 0..6 {
            let povm = random_povm(3, 10, 100 + seed, RandomKind::Pure).unwrap();
            let exact = bottleneck(&povm, BottleneckMode::Exact).unwrap();
            let heur = bottleneck(&povm, BottleneckMode::Heuristic { seed }).unwrap();
            assert!(heur.heuristic);
            assert!(heur.sandwich.is_none());
            assert!(heur.upsilon >= exact.upsilon - 1e-12);
            let again = bottleneck(&povm, BottleneckMode::Heuristic { seed }).unwrap();
            assert_eq!(heur.witness, again.witness);
        }
    }

    #[test]
    fn exact_rejects_large_sets() {
        let povm = random_povm(2, 23, 1, RandomKind::Pure).unwrap();
        assert!(matches!(
            bottleneck(&povm, BottleneckMode::Exact),
            Err(Error::TooManyOutcomes { found: 23, max: 22 })
        ));
    }
}
