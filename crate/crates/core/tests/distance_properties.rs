//! Shape of the distance function and the kappa oracle.

use std::f64::consts::SQRT_2;
use std::sync::OnceLock;

use levycouple::drift::{kappa_oracle_1d, DriftSpec, KappaProfile};
use levycouple::levy_measure::RadialLevyMeasure;
use levycouple::pipeline::{build_pipeline, Pipeline, PipelineConfig};
use proptest::prelude::*;

fn pipelines() -> &'static [Pipeline] {
    static CELL: OnceLock<Vec<Pipeline>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mu = RadialLevyMeasure::alpha_stable(1, 1.5).unwrap();
        let cfg = PipelineConfig::new(0.5, 0.5);
        [
            DriftSpec::step_profile(1.0, 0.0, 2.0 * SQRT_2).unwrap(),
            DriftSpec::double_well(),
            DriftSpec::linear(1, 1.0).unwrap(),
        ]
        .iter()
        .map(|d| build_pipeline(&mu, d, &cfg).unwrap())
        .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn f_is_increasing_and_bounded_below(which in 0usize..3, r1 in 1e-6f64..40.0, dr in 0.0f64..10.0) {
        let df = &pipelines()[which].distance;
        let k = df.constants();
        let (a, b) = (df.f(r1), df.f(r1 + dr));
        prop_assert!(b >= a - 1e-12);
        prop_assert!(a >= k.a);
        prop_assert!(df.f1(r1) >= 0.5 * k.phi_r0 * r1 - 1e-9);
        prop_assert!(df.f1(r1) <= r1 + 1e-12);
    }

    #[test]
    fn f1_is_concave(which in 0usize..3, r1 in 0.0f64..30.0, r2 in 0.0f64..30.0) {
        let df = &pipelines()[which].distance;
        let mid = df.f1(0.5 * (r1 + r2));
        prop_assert!(mid >= 0.5 * (df.f1(r1) + df.f1(r2)) - 1e-9);
    }

    #[test]
    fn f_is_subadditive(which in 0usize..3, r1 in 0.0f64..20.0, r2 in 0.0f64..20.0) {
        let df = &pipelines()[which].distance;
        prop_assert!(df.f(r1 + r2) <= df.f(r1) + df.f(r2) + 1e-12);
    }

    #[test]
    fn phi_is_nonincreasing_and_at_most_one(which in 0usize..3, r in 0.0f64..20.0, dr in 0.0f64..5.0) {
        let df = &pipelines()[which].distance;
        prop_assert!(df.phi(r) <= 1.0);
        prop_assert!(df.phi(r + dr) <= df.phi(r) + 1e-15);
        prop_assert!(df.g(r) >= 0.5 - 1e-12 && df.g(r) <= 1.0);
    }

    #[test]
    fn kappa_oracle_matches_double_well(r in 0.01f64..5.0) {
        // the minimizing x = -r/2 must lie on the grid for exactness
        let r = (r * 1000.0).round() / 1000.0;
        let got = kappa_oracle_1d(|x| x - x * x * x, r, -8.0, 8.0, 32_001).unwrap();
        prop_assert!((got - KappaProfile::DoubleWell.eval(r)).abs() < 1e-6);
    }
}

#[test]
fn evaluating_a_negative_distance_is_an_error() {
    let df = &pipelines()[0].distance;
    assert!(df.f_eval(-1.0).is_err());
    assert_eq!(df.f_eval(0.0).unwrap(), 0.0);
}
