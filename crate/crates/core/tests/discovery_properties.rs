use essr_core::discovery::{infer_stable_params, power_law_fit, POWER_LAW_SAMPLES};
use essr_core::km::stable_radial_prefactor;
use proptest::prelude::*;

#[test]
fn inference_inverts_the_stable_radial_law() {
    for dim in 1..=3 {
        for alpha in [0.5, 1.0, 1.5] {
            for sigma2 in [0.25, 1.0, 2.0] {
                let c = stable_radial_prefactor(dim, alpha, sigma2).unwrap();
                let est = infer_stable_params(c, 1.0 + alpha, dim).unwrap();
                assert!((est.alpha - alpha).abs() < 1e-6, "n={dim} alpha={alpha}: {}", est.alpha);
                assert!((est.sigma2 - sigma2).abs() < 1e-6, "n={dim} sigma2={sigma2}: {}", est.sigma2);
            }
        }
    }
}

#[test]
fn exponents_outside_the_stable_range_are_rejected() {
    for p in [0.5, 1.0, 3.0, 4.5] {
        assert!(infer_stable_params(1.0, p, 2).is_err(), "exponent {p}");
    }
}

proptest! {
    #[test]
    fn power_law_fit_recovers_exact_laws(c in 1e-3f64..1e3, p in 0.1f64..4.0, hi in 2.0f64..100.0) {
        let fit = power_law_fit(|r| c * r.powf(-p), 1.0, hi, POWER_LAW_SAMPLES).unwrap();
        prop_assert!((fit.exponent - p).abs() < 1e-9);
        prop_assert!((fit.prefactor - c).abs() < 1e-9 * c);
    }

    #[test]
    fn forward_then_inverse_is_identity(alpha in 0.05f64..1.95, sigma2 in 0.05f64..5.0, dim in 1usize..4) {
        let c = stable_radial_prefactor(dim, alpha, sigma2).unwrap();
        let est = infer_stable_params(c, 1.0 + alpha, dim).unwrap();
        prop_assert!((est.alpha - alpha).abs() < 1e-9);
        prop_assert!((est.sigma2 - sigma2).abs() < 1e-9 * sigma2.max(1.0));
    }
}
