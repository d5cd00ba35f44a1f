//! Randomized property checks over the admissible parameter ranges, as a
//! complement to the fixed grids in `properties.rs`.

use mesinar_core::dist::{eb_pmf, skellam_pmf, EBParams, SkellamParams};
use mesinar_core::model::{transition_pmf, transition_pmf_bessel, ModelParams, Sign};
use mesinar_core::specfun::{hyp_ratio, log_bessel_i, log_reg_hyp_0f1};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bessel_symmetry_and_identity(y in -30i64..=30, x in 1e-3f64..60.0) {
        let a = log_bessel_i(y, x).unwrap().log_magnitude;
        let b = log_bessel_i(-y, x).unwrap().log_magnitude;
        prop_assert_eq!(a, b);
        // I_y(x) = (x/2)^y 0F1~(; y+1; x^2/4)
        let m = 0.25 * x * x;
        let via_hyp = 0.5 * y as f64 * m.ln() + log_reg_hyp_0f1(y + 1, m).unwrap().log_magnitude;
        prop_assert!((a - via_hyp).abs() < 1e-10, "y={} x={}: {} vs {}", y, x, a, via_hyp);
    }

    #[test]
    fn eb_normalization_and_moments(
        z in -15i64..=15,
        p in 0.05f64..0.95,
        theta in 0.01f64..30.0,
    ) {
        let params = EBParams::new(z, p, theta).unwrap();
        let mut total = 0.0;
        let mut mean = 0.0;
        for x in -260i64..=260 {
            let m = eb_pmf(x, &params);
            total += m;
            mean += x as f64 * m;
        }
        prop_assert!((total - 1.0).abs() < 1e-9, "norm {}", total);
        prop_assert!((mean - p * z as f64).abs() < 1e-7, "mean {}", mean);
        let mut var = 0.0;
        for x in -260i64..=260 {
            var += (x as f64 - p * z as f64).powi(2) * eb_pmf(x, &params);
        }
        let expect = p * (1.0 - p) * z as f64
            + 2.0 * p * (1.0 - p) * theta * hyp_ratio(z, theta).unwrap();
        prop_assert!((var - expect).abs() < 1e-6, "var {} vs {}", var, expect);
    }

    #[test]
    fn skellam_normalizes_and_centers(t1 in 0.0f64..20.0, t2 in 0.0f64..20.0) {
        let params = SkellamParams::new(t1, t2).unwrap();
        let mut total = 0.0;
        let mut mean = 0.0;
        for z in -300i64..=300 {
            let m = skellam_pmf(z, &params);
            total += m;
            mean += z as f64 * m;
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!((mean - (t1 - t2)).abs() < 1e-8);
    }

    #[test]
    fn transition_forms_agree_everywhere(
        phi in 0.0f64..=1.0,
        p in 0.05f64..0.95,
        beta in 0.05f64..6.0,
        t1 in 0.1f64..15.0,
        t2 in 0.1f64..15.0,
        z_prev in -12i64..=12,
        z_next in -12i64..=12,
        minus in proptest::bool::ANY,
    ) {
        let delta = if minus { Sign::Minus } else { Sign::Plus };
        let params = ModelParams::new(phi, p, beta, t1, t2, delta).unwrap();
        let a = transition_pmf(z_prev, z_next, &params);
        let b = transition_pmf_bessel(z_prev, z_next, &params);
        prop_assert!(a >= 0.0 && a <= 1.0 + 1e-12);
        prop_assert!(((a - b) / a.abs().max(1e-300)).abs() < 1e-11,
            "({},{}) {} vs {}", z_prev, z_next, a, b);
    }
}
