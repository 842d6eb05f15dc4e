//! Jump measures against independent closed forms and Monte Carlo oracles.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use levycouple::levy_measure::{
    marginal_density, rho, rho_with_cutoff, sample_jumps, JumpSampler, RadialLevyMeasure, TruncationParams,
};
use levycouple::metrics::ks_one_sample;
use levycouple::quadrature::{adaptive_simpson, Tolerance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sphere(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stable_tail_mass_and_variance(d in 1usize..=3, alpha in 0.3f64..1.9, eta in 1e-3f64..2.0) {
        let mu = RadialLevyMeasure::alpha_stable(d, alpha).unwrap();
        let tail = sphere(d) * eta.powf(-alpha) / alpha;
        let var = sphere(d) * eta.powf(2.0 - alpha) / (2.0 - alpha);
        prop_assert!((mu.tail_mass(eta).unwrap() / tail - 1.0).abs() < 1e-7);
        prop_assert!((mu.residual_variance(eta).unwrap() / var - 1.0).abs() < 1e-7);
    }

    #[test]
    fn rho_is_a_probability(v in -3.0f64..3.0, z in -3.0f64..3.0, m in 0.5f64..5.0) {
        let mu = RadialLevyMeasure::alpha_stable(1, 1.5).unwrap();
        prop_assume!(v != 0.0 && v.abs() <= m);
        let p = rho(&mu, &[v], &[z], m);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn rho_times_density_is_the_overlap(v in -2.0f64..2.0, z in -2.0f64..2.0) {
        let mu = RadialLevyMeasure::alpha_stable(1, 1.2).unwrap();
        let m = 2.5;
        prop_assume!(v.abs() > 1e-3 && (v + z).abs() > 1e-3);
        let q = |x: f64| x.abs().powf(-2.2);
        let inside = if (v + z).abs() <= m { 1.0 } else { 0.0 };
        let expected = q(v).min(q(v + z)) * inside;
        let got = q(v) * rho(&mu, &[v], &[z], m);
        prop_assert!((got - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn rho_with_cutoff_agrees_above_eta(v in 0.2f64..2.0, z in -2.0f64..2.0) {
        let mu = RadialLevyMeasure::alpha_stable(1, 1.5).unwrap();
        let a = rho(&mu, &[v], &[z], 3.0);
        let b = rho_with_cutoff(&mu, &[v], &[z], 3.0, 0.1);
        if (v + z).abs() > 0.1 {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn jump_count_matches_rate() {
    let mu = RadialLevyMeasure::alpha_stable(1, 1.5).unwrap();
    let trunc = TruncationParams::new(1.0, 0.05).unwrap();
    let rate = 2.0 * 0.05f64.powf(-1.5) / 1.5;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let horizon = 200.0;
    let n = sample_jumps(&mu, &trunc, horizon, &mut rng).unwrap().len() as f64;
    let mean = rate * horizon;
    // Poisson: five standard deviations
    assert!((n - mean).abs() < 5.0 * mean.sqrt(), "{n} jumps, expected {mean}");
}

#[test]
fn stable_radii_follow_pareto() {
    let mu = RadialLevyMeasure::alpha_stable(2, 1.5).unwrap();
    let s = JumpSampler::new(&mu, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut out = [0.0; 2];
    let radii: Vec<f64> = (0..20_000).map(|_| s.sample_jump(&mut rng, &mut out)).collect();
    let ks = ks_one_sample(&radii, |r| if r <= 0.1 { 0.0 } else { 1.0 - (r / 0.1).powf(-1.5) }).unwrap();
    assert!(ks.passed, "{ks:?}");
}

#[test]
fn shell_radii_are_uniform() {
    let mu = RadialLevyMeasure::shell_uniform(1.0, 4.0).unwrap();
    let s = JumpSampler::new(&mu, 0.1).unwrap();
    assert_relative_eq!(s.rate(), 1.5, max_relative = 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut out = [0.0];
    let radii: Vec<f64> = (0..20_000).map(|_| s.sample_jump(&mut rng, &mut out)).collect();
    let ks = ks_one_sample(&radii, |r| ((r - 0.25) / 0.75).clamp(0.0, 1.0)).unwrap();
    assert!(ks.passed, "{ks:?}");
}

#[test]
fn two_dimensional_marginal_matches_projected_jumps() {
    let mu = RadialLevyMeasure::alpha_stable(2, 1.5).unwrap();
    let m = 1.0;
    let eta = 0.05;
    let s = JumpSampler::new(&mu, eta).unwrap();
    let marg = marginal_density(&mu, m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 400_000;
    let mut out = [0.0; 2];
    let bins = [(0.1, 0.2), (0.2, 0.4), (0.4, 0.8)];
    let mut counts = [0usize; 3];
    for _ in 0..n {
        let r = s.sample_jump(&mut rng, &mut out);
        if r > m {
            continue;
        }
        let y = out[0].abs();
        for (k, (lo, hi)) in bins.iter().enumerate() {
            if y >= *lo && y < *hi {
                counts[k] += 1;
            }
        }
    }
    let tol = Tolerance { abs: 1e-10, rel: 1e-8 };
    for (k, (lo, hi)) in bins.iter().enumerate() {
        // both signs of the first coordinate
        let mass = 2.0 * adaptive_simpson(|y| marg.density(y).unwrap(), *lo, *hi, tol).unwrap();
        let expected = mass / s.rate() * n as f64;
        let got = counts[k] as f64;
        assert!(
            (got - expected).abs() < 5.0 * expected.sqrt(),
            "bin {lo}..{hi}: {got} vs {expected}"
        );
    }
}
