use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use povm_gap::generators::{random_povm, RandomKind};
use povm_gap::geometry::{cloud_from_povm, gap_from_geometry, wasserstein};
use povm_gap::operator::sqrt_psd;
use povm_gap::povm::{bottleneck, channel_matrix, dual, minimal_noise, noise_ratio, spectral_gap, toeplitz, BottleneckMode};
use povm_gap::{HermitianBasis, HermitianOperator};

fn hermitian(n: usize, entries: &[f64]) -> HermitianOperator {
    HermitianBasis::new(n).from_coords(&entries[..n * n])
}

fn kind(pure: bool) -> RandomKind {
    if pure {
        RandomKind::Pure
    } else {
        RandomKind::Mixed
    }
}

fn povm_params() -> impl Strategy<Value = (usize, usize, u64, bool)> {
    (2usize..=4, 0usize..=8, any::<u64>(), any::<bool>()).prop_map(|(n, extra, seed, pure)| (n, n + extra, seed, pure))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hs_inner_is_bilinear_and_symmetric(
        n in 1usize..=5,
        a in prop::collection::vec(-2.0f64..2.0, 25),
        b in prop::collection::vec(-2.0f64..2.0, 25),
        c in prop::collection::vec(-2.0f64..2.0, 25),
        s in -3.0f64..3.0,
    ) {
        let (a, b, c) = (hermitian(n, &a), hermitian(n, &b), hermitian(n, &c));
        let ab = a.hs_inner(&b).unwrap();
        prop_assert!((ab - b.hs_inner(&a).unwrap()).abs() < 1e-12);
        let mut lin = b.scale(s);
        lin.axpy(1.0, &c);
        let lhs = a.hs_inner(&lin).unwrap();
        let rhs = s * ab + a.hs_inner(&c).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-11);
    }

    #[test]
    fn sqrt_of_psd_squares_back(n in 1usize..=16, seed in any::<u64>()) {
        let g = DMatrix::from_fn(n, n, |i, j| {
            let t = (seed % 1000) as f64 + 1.0;
            Complex64::new((t * (i as f64 + 1.3) * (j as f64 + 0.4)).sin(), (t * (i as f64 + 0.2) + j as f64).cos())
        });
        let h = HermitianOperator::from_matrix(&g * g.adjoint()).unwrap();
        let r = sqrt_psd(&h).unwrap();
        let back = r.square();
        let scale = h.hs_norm().max(1.0);
        prop_assert!(back.max_abs_diff(&h) <= 1e-9 * scale);
    }

    #[test]
    fn eigenvalues_sum_to_trace(n in 1usize..=6, a in prop::collection::vec(-1.0f64..1.0, 36)) {
        let h = hermitian(n, &a);
        let dec = h.eigh().unwrap();
        let sum: f64 = dec.eigenvalues.iter().sum();
        prop_assert!((sum - h.trace()).abs() < 1e-11);
        prop_assert!(dec.residual(&h) < 1e-10);
        prop_assert!(dec.orthonormality_defect() < 1e-10);
        prop_assert!(dec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn toeplitz_and_dual_are_adjoint((n, size, seed, pure) in povm_params(), a in prop::collection::vec(-1.0f64..1.0, 16)) {
        let povm = random_povm(n, size, seed, kind(pure)).unwrap();
        let op = hermitian(n, &a);
        let phi: Vec<f64> = (0..size).map(|s| ((seed % 97) as f64 + s as f64).sin()).collect();
        let lhs = toeplitz(&povm, &phi).unwrap().hs_inner(&op).unwrap();
        let t_star = dual(&povm, &op).unwrap();
        let rhs: f64 = povm.alphas().iter().zip(&phi).zip(&t_star).map(|((al, p), t)| al * p * t).sum();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn channel_is_unital_and_trace_preserving((n, size, seed, pure) in povm_params(), a in prop::collection::vec(-1.0f64..1.0, 16)) {
        let povm = random_povm(n, size, seed, kind(pure)).unwrap();
        let e = channel_matrix(&povm);
        let id = HermitianOperator::identity(n);
        prop_assert!(e.apply(&id).max_abs_diff(&id) < 1e-10);
        let op = hermitian(n, &a);
        prop_assert!((e.apply(&op).trace() - op.trace()).abs() < 1e-10);
    }

    #[test]
    fn positive_spectra_coincide((n, size, seed, pure) in povm_params()) {
        let povm = random_povm(n, size, seed, kind(pure)).unwrap();
        let report = spectral_gap(&povm).unwrap();
        prop_assert!(report.match_error <= 1e-7);
        prop_assert!((report.spectrum_e[0] - 1.0).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&report.gamma));
    }

    #[test]
    fn gap_routes_agree((n, size, seed, pure) in povm_params()) {
        let povm = random_povm(n, size, seed, kind(pure)).unwrap();
        let gamma = spectral_gap(&povm).unwrap().gamma;
        prop_assert!((minimal_noise(&povm).unwrap().value - gamma).abs() <= 1e-8);
        prop_assert!((gap_from_geometry(&povm).unwrap() - gamma).abs() <= 1e-8);
    }

    #[test]
    fn rayleigh_quotients_bound_gap((n, size, seed, pure) in povm_params(), phi in prop::collection::vec(-1.0f64..1.0, 12)) {
        let povm = random_povm(n, size, seed, kind(pure)).unwrap();
        let gamma = spectral_gap(&povm).unwrap().gamma;
        if let Some(r) = noise_ratio(&povm, &phi[..size]).unwrap() {
            prop_assert!(r >= gamma - 1e-8);
        }
    }

    #[test]
    fn bottleneck_sandwich((n, size, seed, pure) in povm_params()) {
        let povm = random_povm(n, size, seed, kind(pure)).unwrap();
        let report = bottleneck(&povm, BottleneckMode::Exact).unwrap();
        prop_assert!(report.sandwich.unwrap().holds);
    }

    #[test]
    fn wasserstein_is_a_metric(n in 2usize..=3, seeds in (any::<u64>(), any::<u64>(), any::<u64>()), sizes in (1usize..=6, 1usize..=6, 1usize..=6)) {
        let cloud = |seed: u64, size: usize| cloud_from_povm(&random_povm(n, size.max(n), seed, RandomKind::Mixed).unwrap());
        let a = cloud(seeds.0, sizes.0);
        let b = cloud(seeds.1, sizes.1);
        let c = cloud(seeds.2, sizes.2);
        let (ab, _) = wasserstein(&a, &b).unwrap();
        let (ba, _) = wasserstein(&b, &a).unwrap();
        let (bc, _) = wasserstein(&b, &c).unwrap();
        let (ac, _) = wasserstein(&a, &c).unwrap();
        let (aa, _) = wasserstein(&a, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-9);
        prop_assert!(aa <= 1e-7);
        prop_assert!(ac <= ab + bc + 1e-8);
    }
}
