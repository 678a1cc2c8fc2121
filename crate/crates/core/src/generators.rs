//! Built-in POVM families.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operator::{bloch_state, eigh, maximally_mixed, pure_from_vector, DensityOperator, HermitianOperator};
use crate::povm::{from_effects, DiscretePovm, Outcome, NORMALIZATION_TOL};
use crate::rng;

/// Measurement in the standard basis of `C^n`.
pub fn projective(n: usize) -> DiscretePovm {
    let outcomes = (0..n)
        .map(|i| {
            let mut d = vec![0.0; n];
            d[i] = 1.0;
            let state = DensityOperator::new(HermitianOperator::from_real_diagonal(&d).unwrap()).unwrap();
            Outcome::new(i.to_string(), 1.0 / n as f64, state)
        })
        .collect();
    DiscretePovm::new(n, outcomes).expect("standard basis resolves the identity")
}

/// The trivial POVM `{Id}`.
pub fn single_outcome(n: usize) -> DiscretePovm {
    DiscretePovm::new(n, vec![Outcome::new("id", 1.0, maximally_mixed(n).unwrap())])
        .expect("identity is a POVM")
}

/// Bloch vectors of the regular tetrahedron.
pub fn tetrahedron_bloch_vectors() -> [[f64; 3]; 4] {
    let s = 1.0 / 3f64.sqrt();
    [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
}

/// Qubit SIC-POVM: effects `P_i/2` with `P_i` on the tetrahedron vertices.
pub fn sic_qubit() -> DiscretePovm {
    let outcomes = tetrahedron_bloch_vectors()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let state = DensityOperator::new(bloch_state(*r)).unwrap();
            Outcome::new(format!("t{i}"), 0.25, state)
        })
        .collect();
    DiscretePovm::new(2, outcomes).expect("tetrahedron resolves the identity")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    /// Rank-one effects; the resulting POVM is pure. Needs `N >= n`.
    Pure,
    /// Each projector mixed with `Id/n` before normalization.
    Mixed,
}

/// Random POVM with `outcomes` effects on `C^n`.
///
/// Effects `W_i = w_i ((1 - l_i) P_i + l_i Id/n)` with `P_i` projectors onto
/// Gaussian vectors, `w_i` uniform in `[0.2, 1]` and `l_i` uniform in
/// `[0.05, 0.5]` (zero for [`RandomKind::Pure`]) are normalized by
/// `W_i -> M^{-1/2} W_i M^{-1/2}` with `M = sum_i W_i`.
pub fn random_povm(n: usize, outcomes: usize, seed: u64, kind: RandomKind) -> Result<DiscretePovm> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if outcomes == 0 {
        return Err(Error::NoOutcomes);
    }
    if kind == RandomKind::Pure && outcomes < n {
        return Err(Error::InvalidConfig(format!(
            "a pure POVM on C^{n} needs at least {n} outcomes"
        )));
    }
    let mut rng = rng::stream(seed, rng::GENERATOR_STREAM);
    let id_n = HermitianOperator::identity(n).scale(1.0 / n as f64);
    let mut raw = Vec::with_capacity(outcomes);
    for _ in 0..outcomes {
        let v = DVector::from_fn(n, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let p = pure_from_vector(&v)?.op().clone();
        let w: f64 = rng.random_range(0.2..1.0);
        let mix = match kind {
            RandomKind::Pure => 0.0,
            RandomKind::Mixed => rng.random_range(0.05..0.5),
        };
        let mut e = p.scale(w * (1.0 - mix));
        e.axpy(w * mix, &id_n);
        raw.push(e);
    }
    let mut total = HermitianOperator::zeros(n);
    for e in &raw {
        total.axpy(1.0, e);
    }
    let dec = eigh(&total)?;
    let min = *dec.eigenvalues.last().unwrap();
    if min <= 1e-10 {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    let inv_sqrt = dec.reconstruct_with(|x| 1.0 / x.sqrt());
    let effects: Vec<HermitianOperator> = raw
        .iter()
        .map(|e| e.sandwich(&inv_sqrt))
        .collect::<Result<_>>()?;
    from_effects(&effects, NORMALIZATION_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projective_weights() {
        let p = projective(3);
        assert_eq!(p.len(), 3);
        for a in p.alphas() {
            assert_abs_diff_eq!(a, 1.0 / 3.0);
        }
        assert!(p.is_pure());
    }

    #[test]
    fn sic_overlaps() {
        let g = sic_qubit().gram();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 1.0 / 3.0 };
                assert_abs_diff_eq!(g[(i, j)], expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn random_povms_are_valid_and_seeded() {
        for (n, size, kind) in [(2, 5, RandomKind::Pure), (3, 4, RandomKind::Mixed), (4, 2, RandomKind::Mixed)] {
            let a = random_povm(n, size, 9, kind).unwrap();
            let b = random_povm(n, size, 9, kind).unwrap();
            assert_eq!(a.len(), size);
            assert!(a.normalization_defect() < 1e-10);
            assert_eq!(a.is_pure(), kind == RandomKind::Pure);
            for s in 0..size {
                assert_eq!(a.state(s), b.state(s));
            }
        }
        let a = random_povm(2, 4, 1, RandomKind::Pure).unwrap();
        let c = random_povm(2, 4, 2, RandomKind::Pure).unwrap();
        assert!(a.state(0).max_abs_diff(c.state(0)) > 1e-6);
    }

    #[test]
    fn pure_needs_enough_outcomes() {
        assert!(matches!(
            random_povm(3, 2, 0, RandomKind::Pure),
            Err(Error::InvalidConfig(_))
        ));
    }
}
