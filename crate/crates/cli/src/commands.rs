//! Subcommand implementations. Each writes its files into the run
//! directory and returns what it wrote.

use std::f64::consts::SQRT_2;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use levycouple::contraction::{verify_functional_inequality, InequalityReport};
use levycouple::coupling_sim::{DecisionCounts, Ensemble, Simulator};
use levycouple::drift::{kappa_oracle_1d, DriftField, DriftSpec, KappaProfile};
use levycouple::levy_measure::{c_epsilon_with, Evaluation, RadialLevyMeasure};
use levycouple::metrics::{contraction_report, ContractionReport};
use levycouple::pipeline::{
    build_pipeline, stable_step_epsilon, stable_step_rate_floor, ConstantsReport, Pipeline, PipelineConfig,
};
use levycouple::quadrature::pairwise_sum;
use serde::Serialize;

use crate::config::RunConfig;

/// Files written by a subcommand and, for checking commands, the verdict.
#[derive(Debug, Clone, Default)]
pub struct CommandOutcome {
    pub files: Vec<PathBuf>,
    pub verified: Option<bool>,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)?;
    fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    files.push(path);
    Ok(())
}

fn csv_writer(dir: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<csv::Writer<fs::File>> {
    let path = dir.join(name);
    let w = csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
    files.push(path);
    Ok(w)
}

fn pipeline(cfg: &RunConfig) -> Result<Pipeline> {
    let mu = cfg.measure()?;
    let drift = cfg.drift_spec()?;
    Ok(build_pipeline(&mu, &drift, &cfg.pipeline_config())?)
}

pub fn constants(cfg: &RunConfig, dir: &Path) -> Result<CommandOutcome> {
    let p = pipeline(cfg)?;
    let mut out = CommandOutcome::default();
    let report = p.report();
    println!("{}", serde_json::to_string_pretty(&report)?);
    write_json(dir, "constants.json", &report, &mut out.files)?;
    Ok(out)
}

#[derive(Serialize)]
struct DistanceOutput {
    #[serde(flatten)]
    constants: ConstantsReport,
    functional_inequality: InequalityReport,
}

pub fn build_distance(cfg: &RunConfig, dir: &Path) -> Result<CommandOutcome> {
    let p = pipeline(cfg)?;
    let mut out = CommandOutcome::default();
    let df = &p.distance;
    let stride = (df.len() / cfg.distance.csv_rows.max(1)).max(1);
    let mut w = csv_writer(dir, "distance.csv", &mut out.files)?;
    for row in df.rows(stride) {
        w.serialize(row)?;
    }
    w.flush()?;
    let upper = (10.0 * p.constants().r1).max(2.0 * p.constants().delta);
    let inequality = verify_functional_inequality(df, p.drift.kappa(), upper)?;
    let output = DistanceOutput {
        constants: p.report(),
        functional_inequality: inequality,
    };
    write_json(dir, "constants.json", &output, &mut out.files)?;
    Ok(out)
}

#[derive(Debug, Serialize)]
struct TimeSummary {
    time: f64,
    mean_distance: Option<f64>,
    coupled_fraction: Option<f64>,
    mean_x: Option<Vec<f64>>,
    mean_y: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct EnsembleSummary {
    dimension: usize,
    n_paths: usize,
    n_valid: usize,
    failed_paths: usize,
    flagged: bool,
    horizon: f64,
    m: f64,
    eta: f64,
    jump_rate: f64,
    seed: u64,
    samples: Vec<TimeSummary>,
    coupled_by_horizon: Option<f64>,
    mean_coupling_time: Option<f64>,
    decisions: DecisionCounts,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| pairwise_sum(values) / values.len() as f64)
}

fn coordinate_means(points: &[Vec<f64>], d: usize) -> Option<Vec<f64>> {
    (0..d)
        .map(|i| mean(&points.iter().map(|p| p[i]).collect::<Vec<_>>()))
        .collect()
}

fn summarize(e: &Ensemble, p: &Pipeline, seed: u64) -> EnsembleSummary {
    let d = e.dimension;
    let samples = e
        .sample_times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let dist: Vec<f64> = e.valid_paths().map(|q| q.distance_at(k, d)).collect();
            TimeSummary {
                time: t,
                mean_distance: mean(&dist),
                coupled_fraction: e.coupled_fraction(t).ok(),
                mean_x: coordinate_means(&e.x_points_at(k), d),
                mean_y: coordinate_means(&e.y_points_at(k), d),
            }
        })
        .collect();
    let times: Vec<f64> = e.valid_paths().filter_map(|q| q.coupling_time).collect();
    let mut decisions = DecisionCounts::default();
    for q in &e.paths {
        decisions.coalesce += q.counts.coalesce;
        decisions.reflect += q.counts.reflect;
        decisions.synchronous_large += q.counts.synchronous_large;
        decisions.synchronous += q.counts.synchronous;
    }
    EnsembleSummary {
        dimension: d,
        n_paths: e.paths.len(),
        n_valid: e.n_valid(),
        failed_paths: e.failed_paths,
        flagged: e.flagged,
        horizon: e.horizon,
        m: p.truncation.m,
        eta: p.truncation.eta,
        jump_rate: p.jump_rate,
        seed,
        samples,
        coupled_by_horizon: e.coupled_fraction(e.horizon).ok(),
        mean_coupling_time: mean(&times),
        decisions,
    }
}

fn write_traces(e: &Ensemble, n: usize, dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let d = e.dimension;
    let mut w = csv_writer(dir, "paths.csv", files)?;
    let mut header = vec!["path".to_string(), "time".to_string()];
    header.extend((0..d).map(|i| format!("x{i}")));
    header.extend((0..d).map(|i| format!("y{i}")));
    header.push("coupled".into());
    w.write_record(&header)?;
    for q in e.paths.iter().take(n) {
        for (k, t) in e.sample_times.iter().enumerate() {
            let mut rec = vec![q.index.to_string(), t.to_string()];
            rec.extend(q.x[k * d..(k + 1) * d].iter().map(f64::to_string));
            rec.extend(q.y[k * d..(k + 1) * d].iter().map(f64::to_string));
            rec.push(q.coupled_by(*t).to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    if e.paths.iter().take(n).any(|q| !q.jumps.is_empty()) {
        let mut w = csv_writer(dir, "jumps.csv", files)?;
        let mut header = vec!["path".to_string(), "time".to_string(), "decision".to_string()];
        header.extend((0..d).map(|i| format!("v{i}")));
        header.extend((0..d).map(|i| format!("w{i}")));
        w.write_record(&header)?;
        for q in e.paths.iter().take(n) {
            for j in &q.jumps {
                let decision = serde_json::to_value(j.decision)?;
                let mut rec = vec![
                    q.index.to_string(),
                    j.time.to_string(),
                    decision.as_str().unwrap_or("").to_string(),
                ];
                rec.extend(j.v.iter().map(f64::to_string));
                rec.extend(j.w.iter().map(f64::to_string));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

pub fn simulate(cfg: &RunConfig, dir: &Path) -> Result<CommandOutcome> {
    let p = pipeline(cfg)?;
    let sim_cfg = cfg.sim_config(&p, &cfg.simulation.sample_times);
    let e = Simulator::new(sim_cfg)?.run_ensemble(cfg.simulation.threads)?;
    let mut out = CommandOutcome::default();
    write_json(
        dir,
        "summary.json",
        &summarize(&e, &p, cfg.simulation.seed),
        &mut out.files,
    )?;
    if cfg.simulation.trace_paths > 0 {
        write_traces(&e, cfg.simulation.trace_paths, dir, &mut out.files)?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct CurveRow {
    time: f64,
    value: f64,
    stderr: f64,
    envelope: f64,
}

/// Runs the ensemble and the contraction report; `verified` is the overall verdict.
pub fn verify(cfg: &RunConfig, dir: &Path) -> Result<CommandOutcome> {
    let p = pipeline(cfg)?;
    let times = cfg.verify_times();
    if times.is_empty() {
        bail!("verification needs at least one time");
    }
    let sim_cfg = cfg.sim_config(&p, &times);
    let initial = sim_cfg.initial.clone();
    let e = Simulator::new(sim_cfg)?.run_ensemble(cfg.simulation.threads)?;
    let options = cfg.report_options(p.constants().c);
    let report: ContractionReport = contraction_report(&e, &p.distance, &initial, &times, options)?;
    let mut out = CommandOutcome::default();
    write_json(dir, "report.json", &report, &mut out.files)?;
    write_json(dir, "constants.json", &p.report(), &mut out.files)?;
    let mut w = csv_writer(dir, "curve.csv", &mut out.files)?;
    for (k, t) in report.times.iter().enumerate() {
        w.serialize(CurveRow {
            time: *t,
            value: report.curve.mean[k],
            stderr: report.curve.stderr[k],
            envelope: report.envelope[k],
        })?;
    }
    w.flush()?;
    for v in report.verdicts.iter().filter(|v| !v.passed) {
        log::warn!("failed check {} at {:?}: {} > {}", v.check, v.time, v.lhs, v.rhs);
    }
    out.verified = Some(report.passed);
    Ok(out)
}

#[derive(Debug, Serialize)]
struct ExampleReport {
    alpha: f64,
    radius: f64,
    kappa_above: f64,
    epsilon_star: f64,
    c_eps_closed_form: f64,
    c_eps_quadrature: f64,
    /// `C_eps / (2 R^2 + 4 eps R)`.
    c1_closed_form: f64,
    rate_floor: f64,
    constants: ConstantsReport,
    checks: Vec<(String, bool)>,
}

/// Step-profile example: `alpha = 3/2`, `kappa = 2 sqrt 2 1[r >= 1]`, `C_L = 0`.
pub fn reproduce_example(
    dir: &Path,
    k_convention: Option<levycouple::contraction::KConvention>,
) -> Result<CommandOutcome> {
    let (alpha, radius) = (1.5, 1.0);
    let above = 2.0 * SQRT_2;
    let eps = stable_step_epsilon(alpha, radius)?;
    let mu = RadialLevyMeasure::alpha_stable(1, alpha)?;
    let drift = DriftSpec::step_profile(radius, 0.0, above)?;
    let mut pc = PipelineConfig::new(eps, eps);
    if let Some(k) = k_convention {
        pc = pc.with_k_convention(k);
    }
    let p = build_pipeline(&mu, &drift, &pc)?;
    let k = *p.constants();
    let c_eps_closed = 2.0 / (2.0 - alpha) * (eps / 4.0).powf(2.0 - alpha);
    let c_eps_quad = c_epsilon_with(&mu, eps, Evaluation::Quadrature)?;
    let c1_closed = c_eps_closed / (2.0 * radius * radius + 4.0 * eps * radius);
    let floor = stable_step_rate_floor(alpha, radius, eps);
    let checks = vec![
        ("epsilon_star = 1/2".to_string(), eps == 0.5),
        ("C_eps = sqrt 2".to_string(), (c_eps_closed - SQRT_2).abs() < 1e-15),
        (
            "quadrature C_eps within 1e-4".to_string(),
            (c_eps_quad / SQRT_2 - 1.0).abs() < 1e-4,
        ),
        (
            "closed-form c1 = sqrt 2 / 4".to_string(),
            (c1_closed - SQRT_2 / 4.0).abs() < 1e-15,
        ),
        ("pipeline c >= floor".to_string(), k.c >= floor),
        (
            "C_delta = 32/3 within 1e-3".to_string(),
            (k.c_delta * 3.0 / 32.0 - 1.0).abs() < 1e-3,
        ),
    ];
    let passed = checks.iter().all(|(_, ok)| *ok);
    let report = ExampleReport {
        alpha,
        radius,
        kappa_above: above,
        epsilon_star: eps,
        c_eps_closed_form: c_eps_closed,
        c_eps_quadrature: c_eps_quad,
        c1_closed_form: c1_closed,
        rate_floor: floor,
        constants: p.report(),
        checks,
    };
    let mut out = CommandOutcome::default();
    println!("{}", serde_json::to_string_pretty(&report)?);
    write_json(dir, "example.json", &report, &mut out.files)?;
    out.verified = Some(passed);
    Ok(out)
}

#[derive(Serialize)]
struct OracleRow {
    r: f64,
    oracle: f64,
    profile: f64,
    abs_error: f64,
}

#[derive(Serialize)]
struct OracleSummary {
    points: usize,
    max_abs_error: f64,
}

/// Brute-force `kappa` of the configured one-dimensional drift against its profile.
pub fn kappa_oracle(cfg: &RunConfig, dir: &Path) -> Result<CommandOutcome> {
    let drift = cfg.drift_spec()?;
    if drift.dimension() != 1 || matches!(drift.field(), DriftField::ProfileOnly) {
        bail!("kappa-oracle needs a one-dimensional drift with a vector field (linear or double-well)");
    }
    let o = &cfg.oracle;
    let kappa: &KappaProfile = drift.kappa();
    let mut out = CommandOutcome::default();
    let mut w = csv_writer(dir, "kappa.csv", &mut out.files)?;
    let mut worst: f64 = 0.0;
    for i in 1..=o.points {
        let r = o.r_max * i as f64 / o.points as f64;
        let oracle = kappa_oracle_1d(|x| drift.eval_1d(x), r, o.x_lo, o.x_hi, o.grid_n)?;
        let profile = kappa.eval(r);
        let abs_error = (oracle - profile).abs();
        worst = worst.max(abs_error);
        w.serialize(OracleRow {
            r,
            oracle,
            profile,
            abs_error,
        })?;
    }
    w.flush()?;
    let summary = OracleSummary {
        points: o.points,
        max_abs_error: worst,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    write_json(dir, "kappa.json", &summary, &mut out.files)?;
    Ok(out)
}
