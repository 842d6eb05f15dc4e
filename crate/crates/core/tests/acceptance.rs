//! Acceptance suite. Runs every criterion in sequence, prints one
//! `[PASS]`/`[FAIL]` line per criterion and exits non-zero if any fails.
//! Criteria run one at a time so the reported runtimes are not inflated by
//! each other.

use std::f64::consts::SQRT_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use levycouple::contraction::verify_functional_inequality;
use levycouple::coupling_sim::{Ensemble, InitialLaw, SimConfig, Simulator};
use levycouple::drift::{kappa_oracle_1d, DriftSpec, KappaProfile};
use levycouple::levy_measure::{c_delta_overlap_with, c_epsilon_with, Evaluation, RadialLevyMeasure};
use levycouple::metrics::{check_corollaries, ef_decay_curve, empirical_w1_1d, fit_rate, ks_two_sample, w1_assignment};
use levycouple::pipeline::{build_pipeline, stable_step_epsilon, stable_step_rate_floor, Pipeline, PipelineConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N_PATHS: usize = 10_000;
const SEED: u64 = 20_240_501;
/// Small-jump variance budget as a fraction of `C_eps`; keeps the jump
/// rate near 3e4 per unit time for alpha = 1.5.
const VARIANCE_BUDGET: f64 = 0.1;
const GRID: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
const HORIZON: f64 = 20.0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn stable() -> RadialLevyMeasure {
    RadialLevyMeasure::alpha_stable(1, 1.5).unwrap()
}

fn step_fixture() -> (RadialLevyMeasure, DriftSpec, PipelineConfig) {
    let drift = DriftSpec::step_profile(1.0, 0.0, 2.0 * SQRT_2).unwrap();
    (stable(), drift, PipelineConfig::new(0.5, 0.5))
}

fn ou_pipeline() -> (Pipeline, DriftSpec) {
    let drift = DriftSpec::linear(1, 1.0).unwrap();
    let cfg = PipelineConfig::new(0.5, 0.5).with_variance_budget(VARIANCE_BUDGET);
    (build_pipeline(&stable(), &drift, &cfg).unwrap(), drift)
}

fn ou_config(p: &Pipeline, drift: &DriftSpec) -> SimConfig {
    let mut cfg = SimConfig::new(
        p.measure.clone(),
        p.truncation,
        drift.clone(),
        InitialLaw::fixed_1d(2.0, -2.0),
    );
    cfg.n_paths = N_PATHS;
    cfg.base_seed = SEED;
    cfg
}

/// The `X0 = 2, Y0 = -2` ensemble shared by the contraction criteria.
struct Shared {
    pipeline: Pipeline,
    drift: DriftSpec,
    ensemble: Option<(Ensemble, Duration)>,
}

impl Shared {
    fn ensemble(&mut self) -> (&Ensemble, Duration) {
        if self.ensemble.is_none() {
            let t0 = Instant::now();
            let mut cfg = ou_config(&self.pipeline, &self.drift);
            cfg.sample_times = GRID.to_vec();
            cfg.horizon = HORIZON;
            let e = Simulator::new(cfg).unwrap().run_ensemble(None).unwrap();
            self.ensemble = Some((e, t0.elapsed()));
        }
        let (e, d) = self.ensemble.as_ref().unwrap();
        (e, *d)
    }
}

fn constants_reproduction() -> Outcome {
    let t0 = Instant::now();
    let (mu, drift, cfg) = step_fixture();
    let p = build_pipeline(&mu, &drift, &cfg).unwrap();
    let k = p.constants();
    let c_eps_quad = c_epsilon_with(&mu, 0.5, Evaluation::Quadrature).unwrap();
    let eps0 = stable_step_epsilon(1.5, 1.0).unwrap();
    let floor = stable_step_rate_floor(1.5, 1.0, 0.5);
    let elapsed = t0.elapsed();
    let checks = [
        k.c_eps == SQRT_2 || rel(k.c_eps, SQRT_2) < 1e-15,
        rel(c_eps_quad, SQRT_2) < 1e-4,
        rel(k.c_delta, 32.0 / 3.0) < 1e-3,
        eps0 == 0.5,
        k.r0 == 0.0,
        (k.r1 - 1.0).abs() < 1e-3,
        (k.c1 - SQRT_2 / 2.0).abs() < 1e-3,
        k.k == 1.0,
        (k.c - SQRT_2 / 4.0).abs() < 1e-3,
        k.c >= floor,
        elapsed < Duration::from_secs(1),
    ];
    outcome(
        checks.iter().all(|c| *c),
        format!(
            "C_eps={:.12} (quad {:.10}) C_delta={:.8} eps0={eps0} R0={} R1={:.6} c1={:.6} K={} c={:.6} floor={:.6} in {elapsed:.2?}",
            k.c_eps, c_eps_quad, k.c_delta, k.r0, k.r1, k.c1, k.k, k.c, floor
        ),
    )
}

fn functional_inequality() -> Outcome {
    let t0 = Instant::now();
    let (mu, step, cfg) = step_fixture();
    let mut details = Vec::new();
    let mut passed = true;
    for (name, drift) in [("step", step), ("double-well", DriftSpec::double_well())] {
        let p = build_pipeline(&mu, &drift, &cfg).unwrap();
        let upper = 10.0 * p.constants().r1;
        let r = verify_functional_inequality(&p.distance, drift.kappa(), upper).unwrap();
        passed &= r.passed && r.max_violation <= 1e-8 && r.points == 2000;
        details.push(format!(
            "{name}: max {:.3e} at r={:.4} on (δ, {:.3}]",
            r.max_violation, r.argmax, upper
        ));
    }
    let elapsed = t0.elapsed();
    passed &= elapsed < Duration::from_secs(5);
    outcome(passed, format!("{} in {elapsed:.2?}", details.join("; ")))
}

fn marginal_invariance() -> Outcome {
    let t0 = Instant::now();
    let (p, drift) = ou_pipeline();
    let mut cfg = ou_config(&p, &drift);
    cfg.sample_times = vec![1.0];
    cfg.horizon = 1.0;
    let sim = Simulator::new(cfg).unwrap();
    let coupled = sim.run_ensemble(None).unwrap();
    let single = sim.run_single_ensemble(None).unwrap();
    let ks = ks_two_sample(&coupled.x_at(0), &single.x_at(0)).unwrap();
    let elapsed = t0.elapsed();
    let passed = ks.statistic < 0.025
        && coupled.n_valid() == N_PATHS
        && single.x_at(0).len() == N_PATHS
        && elapsed < Duration::from_secs(120);
    outcome(
        passed,
        format!(
            "KS={:.5} (1% critical {:.5}) on {} vs {} paths in {elapsed:.2?}",
            ks.statistic,
            ks.critical_1pct,
            coupled.n_valid(),
            single.x_at(0).len()
        ),
    )
}

fn exponential_contraction(shared: &mut Shared) -> Outcome {
    let t0 = Instant::now();
    let df = shared.pipeline.distance.clone();
    let c = df.constants().c;
    let (e, built) = shared.ensemble();
    let curve = ef_decay_curve(e, &df, &GRID).unwrap();
    let f4 = df.f(4.0);
    let mut passed = true;
    let mut cols = Vec::new();
    for ((t, m), s) in GRID.iter().zip(&curve.mean).zip(&curve.stderr) {
        let bound = 1.1 * (-c * t).exp() * f4;
        passed &= *m <= bound;
        cols.push(format!("t={t}: {m:.4}±{s:.4} ≤ {bound:.4}"));
    }
    let fit = fit_rate(&curve);
    let rate_line = match &fit {
        Ok(f) => {
            passed &= f.rate >= 0.9 * c;
            format!("fitted rate {:.4} ≥ 0.9c = {:.4}", f.rate, 0.9 * c)
        }
        Err(err) => {
            passed = false;
            format!("rate fit failed: {err}")
        }
    };
    let elapsed = built + t0.elapsed();
    passed &= elapsed < Duration::from_secs(300) && !e.flagged;
    outcome(
        passed,
        format!(
            "c={c:.5} f(4)={f4:.5}; {}; {rate_line}; {} paths in {elapsed:.2?}",
            cols.join(", "),
            e.n_valid()
        ),
    )
}

fn coupling_success(shared: &mut Shared) -> Outcome {
    let (e, _) = shared.ensemble();
    let frac = e.coupled_fraction(HORIZON).unwrap();
    outcome(
        frac >= 0.99 && e.n_valid() == N_PATHS,
        format!("P(T ≤ {HORIZON}) = {frac:.4} over {} paths", e.n_valid()),
    )
}

fn corollary_envelopes(shared: &mut Shared) -> Outcome {
    let df = shared.pipeline.distance.clone();
    let c = df.constants().c;
    let (e, _) = shared.ensemble();
    let rows = check_corollaries(e, &df, &InitialLaw::fixed_1d(2.0, -2.0), c, &[1.0, 2.0, 4.0], 0.2).unwrap();
    let passed = rows.iter().all(|r| r.tv_passed && r.w1_passed);
    let cols: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "t={}: TV {:.4} ≤ {:.4}, W1 {:.4} ≤ {:.4}",
                r.time, r.tv_surrogate, r.tv_bound, r.w1, r.w1_bound
            )
        })
        .collect();
    outcome(passed, cols.join("; "))
}

fn assumption_feasibility() -> Outcome {
    let drift = DriftSpec::linear(1, 1.0).unwrap();
    let narrow = RadialLevyMeasure::shell_uniform(1.0, 2.5).unwrap();
    let err = build_pipeline(&narrow, &drift, &PipelineConfig::new(0.7, 0.7)).err();
    let rejected = err.as_ref().and_then(|e| e.assumption()) == Some(4);
    let wide = RadialLevyMeasure::shell_uniform(1.0, 4.0).unwrap();
    let accepted = build_pipeline(&wide, &drift, &PipelineConfig::new(1.5, 1.5));
    let (ok, note) = match &accepted {
        Ok(p) => {
            let k = p.constants();
            (
                k.c_delta > 0.0 && k.c_eps > 0.0,
                format!("C_eps={:.5} C_delta={:.5} c={:.5}", k.c_eps, k.c_delta, k.c),
            )
        }
        Err(e) => (false, format!("unexpected error: {e}")),
    };
    outcome(
        rejected && ok,
        format!(
            "beta=2.5: {}; beta=4: {note}",
            err.map(|e| e.to_string()).unwrap_or_else(|| "accepted".into())
        ),
    )
}

fn oracle_equivalences() -> Outcome {
    let mut passed = true;
    let mut worst_kappa: f64 = 0.0;
    for i in 1..=100 {
        let r = 0.05 * i as f64;
        let lin = kappa_oracle_1d(|x| -x, r, -10.0, 10.0, 20_001).unwrap();
        let dw = kappa_oracle_1d(|x| x - x * x * x, r, -10.0, 10.0, 20_001).unwrap();
        worst_kappa = worst_kappa
            .max((lin - KappaProfile::Constant { value: 1.0 }.eval(r)).abs())
            .max((dw - KappaProfile::DoubleWell.eval(r)).abs());
    }
    passed &= worst_kappa <= 1e-6;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_w1: f64 = 0.0;
    for n in [1usize, 2, 7, 50, 200] {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..8.0)).collect();
        let sorted = empirical_w1_1d(&a, &b).unwrap();
        let pa: Vec<Vec<f64>> = a.iter().map(|x| vec![*x]).collect();
        let pb: Vec<Vec<f64>> = b.iter().map(|x| vec![*x]).collect();
        let assigned = w1_assignment(&pa, &pb).unwrap();
        worst_w1 = worst_w1.max(rel(assigned, sorted));
    }
    // the two estimates sum the same matched costs in different orders
    passed &= worst_w1 <= 1e-13;

    let mu = stable();
    let mut worst_quad: f64 = 0.0;
    for eps in [0.1, 0.5, 2.0] {
        let closed = c_epsilon_with(&mu, eps, Evaluation::Auto).unwrap();
        let quad = c_epsilon_with(&mu, eps, Evaluation::Quadrature).unwrap();
        worst_quad = worst_quad.max(rel(quad, closed));
    }
    for delta in [0.1, 0.5, 2.0] {
        for m in [1.0, f64::INFINITY] {
            let closed = c_delta_overlap_with(&mu, delta, m, Evaluation::Auto).unwrap();
            let quad = c_delta_overlap_with(&mu, delta, m, Evaluation::Quadrature).unwrap();
            worst_quad = worst_quad.max(rel(quad, closed));
        }
    }
    passed &= worst_quad <= 1e-6;
    outcome(
        passed,
        format!("kappa max abs err {worst_kappa:.2e}; W1 sorted vs assignment rel {worst_w1:.2e}; quadrature vs closed form rel {worst_quad:.2e}"),
    )
}

fn same_bits(a: &Ensemble, b: &Ensemble) -> bool {
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    a.paths.len() == b.paths.len()
        && a.failed_paths == b.failed_paths
        && a.paths.iter().zip(&b.paths).all(|(p, q)| {
            p.index == q.index
                && bits(&p.x) == bits(&q.x)
                && bits(&p.y) == bits(&q.y)
                && p.coupling_time.map(f64::to_bits) == q.coupling_time.map(f64::to_bits)
                && p.failed == q.failed
                && p.counts == q.counts
        })
}

fn determinism() -> Outcome {
    let (p, drift) = ou_pipeline();
    let mut cfg = ou_config(&p, &drift);
    cfg.n_paths = 256;
    cfg.sample_times = vec![0.5, 1.0, 2.0];
    cfg.horizon = 2.0;
    let sim = Simulator::new(cfg).unwrap();
    let runs: Vec<Ensemble> = [1, 4, 16].iter().map(|t| sim.run_ensemble(Some(*t)).unwrap()).collect();
    let passed = same_bits(&runs[0], &runs[1]) && same_bits(&runs[0], &runs[2]);
    outcome(
        passed,
        format!(
            "{} paths compared bitwise under 1, 4 and 16 threads",
            runs[0].paths.len()
        ),
    )
}

fn main() -> ExitCode {
    let (pipeline, drift) = ou_pipeline();
    let mut shared = Shared {
        pipeline,
        drift,
        ensemble: None,
    };
    let mut all = true;
    let mut report = |id: u32, name: &str, run: &mut dyn FnMut() -> Outcome| {
        let o = run();
        all &= o.passed;
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] AC-{id} {name}: {}", o.detail);
    };
    report(1, "constants reproduction", &mut constants_reproduction);
    report(2, "functional inequality", &mut functional_inequality);
    report(3, "marginal-law invariance", &mut marginal_invariance);
    report(4, "exponential contraction", &mut || {
        exponential_contraction(&mut shared)
    });
    report(5, "coupling success", &mut || coupling_success(&mut shared));
    report(6, "corollary envelopes", &mut || corollary_envelopes(&mut shared));
    report(7, "assumption feasibility", &mut assumption_feasibility);
    report(8, "oracle equivalences", &mut oracle_equivalences);
    report(9, "determinism", &mut determinism);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
