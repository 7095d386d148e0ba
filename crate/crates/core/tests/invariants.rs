//! Property tests of the spec-level invariants.

use cdsar_core::classify::EmpiricalCdf;
use cdsar_core::special::{fresnel, phi};
use cdsar_core::statmodel::{
    assemble_covariance, contrast_from_weights, weights_from_contrast, ContrastSpec,
    DelayProfile, LineGrid, ModelKind, WeightVector, PSD_TOLERANCE,
};
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_modulus_never_exceeds_one(v1 in -60.0..60.0f64, v2 in -220.0..220.0f64) {
        prop_assert!(phi(v1, v2).norm() <= 1.0 + 1e-10);
    }

    #[test]
    fn phi_conjugate_symmetry(v1 in -40.0..40.0f64, v2 in -150.0..150.0f64) {
        let a = phi(v1, v2);
        let b = phi(-v1, -v2).conj();
        prop_assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn fresnel_is_odd(x in -9.0..9.0f64) {
        let (c, s) = fresnel(x);
        let (cn, sn) = fresnel(-x);
        prop_assert_eq!(c, -cn);
        prop_assert_eq!(s, -sn);
    }

    #[test]
    fn contrast_round_trip(pn in 0.0..3.0f64, q in 0.0..0.99f64, power in 0.1..10.0f64) {
        let w = weights_from_contrast(&ContrastSpec { noise_ratio: pn, contrast: q }, power)
            .unwrap();
        prop_assert!((w.total() - power).abs() < 1e-12 * power);
        let back = contrast_from_weights(&w).unwrap();
        prop_assert!((back.noise_ratio - pn).abs() < 1e-9);
        prop_assert!((back.contrast - q).abs() < 1e-12);
    }

    #[test]
    fn covariance_psd_for_random_weights(
        wb in 0.0..2.0f64,
        wn in 0.0..1.0f64,
        wx in 0.0..2.0f64,
        kappa in 0.4..3.0f64,
        t_model in proptest::bool::ANY,
    ) {
        prop_assume!(wb + wn + wx > 1e-6);
        let grid = LineGrid::standard(kappa, 3.0 * PI, 5.0 * PI).unwrap();
        let profile = DelayProfile::indicator(5.0 * PI).unwrap();
        let w = WeightVector { background: wb, noise: wn, target: wx };
        let model = if t_model { ModelKind::T } else { ModelKind::S };
        let cov = assemble_covariance(&grid, &w, model, &profile).unwrap();
        for m in &cov.lines {
            let eig = m.clone().symmetric_eigen();
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(min >= -PSD_TOLERANCE * m.trace());
        }
    }

    #[test]
    fn empirical_cdf_nondecreasing_in_range(
        samples in proptest::collection::vec(-50.0..50.0f64, 1..40),
        probes in proptest::collection::vec(-60.0..60.0f64, 2..20),
    ) {
        let cdf = EmpiricalCdf::new(&samples).unwrap();
        let mut sorted = probes.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = -1.0;
        for x in sorted {
            let v = cdf.eval(x);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v >= prev);
            prev = v;
        }
    }
}
