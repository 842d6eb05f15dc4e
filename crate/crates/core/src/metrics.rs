//! Estimators on ensemble output: decay curves, rate fits, empirical
//! Wasserstein distances, Kolmogorov–Smirnov statistics and the checks of
//! the contraction, total-variation and `W1` envelopes.

use serde::{Deserialize, Serialize};

use crate::contraction::DistanceFunction;
use crate::coupling_sim::{Ensemble, InitialLaw, SimConfig, Simulator};
use crate::error::{Error, Result};
use crate::quadrature::pairwise_sum;

/// Rate fits ignore points whose relative standard error exceeds this.
pub const FIT_MAX_REL_STDERR: f64 = 0.25;
/// Default multiplicative tolerance for the envelope checks.
pub const COROLLARY_TOL: f64 = 0.2;
/// Largest sample size for the assignment-based `W1`.
pub const ASSIGNMENT_MAX: usize = 2000;

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    // shifted by the first value: exact when all values agree
    let shift = values[0];
    let dev: Vec<f64> = values.iter().map(|v| v - shift).collect();
    let mean = shift + pairwise_sum(&dev) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimate of `E f(|X_t - Y_t|)` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

fn sample_index(ensemble: &Ensemble, t: f64) -> Result<usize> {
    ensemble
        .sample_times
        .iter()
        .position(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
        .ok_or_else(|| Error::InsufficientData(format!("time {t} is not a sample time of the ensemble")))
}

/// Pointwise mean and standard error of `f(|Z_t|)` at `times`.
pub fn ef_decay_curve(ensemble: &Ensemble, df: &DistanceFunction, times: &[f64]) -> Result<DecayCurve> {
    if ensemble.n_valid() == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let d = ensemble.dimension;
    let mut curve = DecayCurve {
        times: times.to_vec(),
        mean: Vec::with_capacity(times.len()),
        stderr: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let k = sample_index(ensemble, t)?;
        let values: Vec<f64> = ensemble.valid_paths().map(|p| df.f(p.distance_at(k, d))).collect();
        let (m, s) = mean_and_stderr(&values);
        curve.mean.push(m);
        curve.stderr.push(s);
    }
    Ok(curve)
}

/// Log-linear least-squares fit `log v = intercept - rate t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    pub intercept: f64,
    /// Root mean square residual in log space.
    pub residual: f64,
    pub points: usize,
}

/// Fits an exponential rate to the positive, well-resolved part of `curve`.
pub fn fit_rate(curve: &DecayCurve) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = curve
        .times
        .iter()
        .zip(&curve.mean)
        .zip(&curve.stderr)
        .filter(|((_, m), s)| **m > 0.0 && **s <= FIT_MAX_REL_STDERR * **m)
        .map(|((t, m), _)| (*t, m.ln()))
        .collect();
    fit_log_linear(&pts)
}

fn fit_log_linear(pts: &[(f64, f64)]) -> Result<RateFit> {
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "rate fit needs at least 3 usable points, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("rate fit needs distinct times".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(RateFit {
        rate: -slope,
        intercept,
        residual: (ss / n).sqrt(),
        points: pts.len(),
    })
}

/// `W1` between two equally sized samples on the line (sorted coupling).
pub fn empirical_w1_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InsufficientData(format!(
            "sorted coupling needs equal sample sizes, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect();
    Ok(pairwise_sum(&gaps) / a.len() as f64)
}

/// `W1 = int |F_a - F_b|` between empirical laws of any sizes on the line.
pub fn w1_1d_unequal(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut prev = a[0].min(b[0]);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.min(*y),
            (Some(x), None) => *x,
            (None, Some(y)) => *y,
            (None, None) => unreachable!(),
        };
        total += (i as f64 / na - j as f64 / nb).abs() * (next - prev);
        while i < a.len() && a[i] == next {
            i += 1;
        }
        while j < b.len() && b[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}

/// Minimum-cost perfect matching for a square cost matrix given row-wise;
/// returns the column assigned to each row.
pub fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    // shortest augmenting paths with row/column potentials, O(n^3)
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `W1` between two equally sized point clouds by exact assignment.
pub fn w1_assignment(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    let n = a.len();
    if n != b.len() {
        return Err(Error::InsufficientData(format!(
            "assignment needs equal sizes, got {n} and {}",
            b.len()
        )));
    }
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    if n > ASSIGNMENT_MAX {
        return Err(Error::InsufficientData(format!(
            "assignment is limited to {ASSIGNMENT_MAX} points, got {n}"
        )));
    }
    let cost: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| euclid(x, y))).collect();
    let assign = hungarian(&cost, n);
    let chosen: Vec<f64> = assign.iter().enumerate().map(|(i, &j)| cost[i * n + j]).collect();
    Ok(pairwise_sum(&chosen) / n as f64)
}

/// `W1` between point clouds: sorted coupling in `d = 1`, assignment otherwise.
pub fn empirical_w1(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.first().is_some_and(|p| p.len() == 1) {
        let xa: Vec<f64> = a.iter().map(|p| p[0]).collect();
        let xb: Vec<f64> = b.iter().map(|p| p[0]).collect();
        return empirical_w1_1d(&xa, &xb);
    }
    w1_assignment(a, b)
}

/// Kolmogorov–Smirnov statistic with its 1% critical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical_1pct: f64,
    pub passed: bool,
}

/// Asymptotic 1% critical coefficient of the Kolmogorov distribution.
const KS_C_1PCT: f64 = 1.628;

/// Two-sample statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let critical = KS_C_1PCT * ((na + nb) / (na * nb)).sqrt();
    Ok(KsResult {
        statistic: d,
        critical_1pct: critical,
        passed: d < critical,
    })
}

/// One-sample statistic `sup |F_n - F|` against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    let critical = KS_C_1PCT / n.sqrt();
    Ok(KsResult {
        statistic: d,
        critical_1pct: critical,
        passed: d < critical,
    })
}

/// A named comparison `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub time: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

impl Verdict {
    fn new(check: &str, time: Option<f64>, lhs: f64, rhs: f64) -> Self {
        Self {
            check: check.to_string(),
            time,
            lhs,
            rhs,
            passed: lhs <= rhs,
        }
    }
}

/// Envelope checks at one time for a fixed pair of starting points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryRow {
    pub time: f64,
    pub uncoupled: f64,
    pub tv_surrogate: f64,
    pub tv_bound: f64,
    pub w1: f64,
    pub w1_bound: f64,
    pub tv_passed: bool,
    pub w1_passed: bool,
}

/// Checks `2 P(X_t != Y_t) <= (2/a) e^{-ct} f(|x0 - y0|) (1 + tol)` and
/// `W1(X_t, Y_t) <= (2/phi(R0)) e^{-ct} f(|x0 - y0|) (1 + tol)`.
pub fn check_corollaries(
    ensemble: &Ensemble,
    df: &DistanceFunction,
    initial: &InitialLaw,
    rate: f64,
    times: &[f64],
    tol: f64,
) -> Result<Vec<CorollaryRow>> {
    let (x0, y0) = match initial {
        InitialLaw::Fixed { x0, y0 } => (x0, y0),
        InitialLaw::Samples { .. } => {
            return Err(Error::Config("envelope checks need fixed starting points".into()));
        }
    };
    if ensemble.n_valid() == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let wf0 = df.f(euclid(x0, y0));
    let k = df.constants();
    times
        .iter()
        .map(|&t| {
            let idx = sample_index(ensemble, t)?;
            let uncoupled = 1.0 - ensemble.coupled_fraction(t)?;
            let xs = ensemble.x_points_at(idx);
            let ys = ensemble.y_points_at(idx);
            let (xs, ys) = if xs[0].len() > 1 && xs.len() > ASSIGNMENT_MAX {
                (xs[..ASSIGNMENT_MAX].to_vec(), ys[..ASSIGNMENT_MAX].to_vec())
            } else {
                (xs, ys)
            };
            let w1 = empirical_w1(&xs, &ys)?;
            let decay = (-rate * t).exp() * wf0 * (1.0 + tol);
            let tv_bound = k.prefactor_tv * decay;
            let w1_bound = k.prefactor_w1 * decay;
            Ok(CorollaryRow {
                time: t,
                uncoupled,
                tv_surrogate: 2.0 * uncoupled,
                tv_bound,
                w1,
                w1_bound,
                tv_passed: 2.0 * uncoupled <= tv_bound,
                w1_passed: w1 <= w1_bound,
            })
        })
        .collect()
}

/// Settings of [`contraction_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Rate used for every envelope; normally the constant `c`.
    pub rate: f64,
    /// Tolerance on `E f(|Z_t|) <= e^{-ct} E f(|Z_0|)`.
    pub envelope_tol: f64,
    /// The fitted rate must reach this fraction of `rate`.
    pub rate_fraction: f64,
    pub corollary_tol: f64,
}

impl ReportOptions {
    pub fn for_rate(rate: f64) -> Self {
        Self {
            rate,
            envelope_tol: 0.1,
            rate_fraction: 0.9,
            corollary_tol: COROLLARY_TOL,
        }
    }
}

/// Decay curve, fitted rate, envelopes and verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub times: Vec<f64>,
    pub curve: DecayCurve,
    pub initial_ef: f64,
    pub envelope: Vec<f64>,
    pub fit: Option<RateFit>,
    pub corollaries: Vec<CorollaryRow>,
    pub options: ReportOptions,
    pub n_paths: usize,
    pub failed_paths: usize,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

/// Builds the full report for an ensemble started from a fixed pair.
/// `times` must be sample times of the ensemble; `E f(|Z_0|)` is computed
/// from the starting points.
pub fn contraction_report(
    ensemble: &Ensemble,
    df: &DistanceFunction,
    initial: &InitialLaw,
    times: &[f64],
    options: ReportOptions,
) -> Result<ContractionReport> {
    let InitialLaw::Fixed { x0, y0 } = initial else {
        return Err(Error::Config(
            "the contraction report needs fixed starting points".into(),
        ));
    };
    let curve = ef_decay_curve(ensemble, df, times)?;
    let initial_ef = df.f(euclid(x0, y0));
    let envelope: Vec<f64> = times.iter().map(|t| (-options.rate * t).exp() * initial_ef).collect();
    let mut verdicts = Vec::new();
    for ((t, m), e) in times.iter().zip(&curve.mean).zip(&envelope) {
        verdicts.push(Verdict::new(
            "expected-distance-envelope",
            Some(*t),
            *m,
            (1.0 + options.envelope_tol) * e,
        ));
    }
    let fit = fit_rate(&curve).ok();
    match fit {
        Some(f) => verdicts.push(Verdict::new(
            "fitted-rate",
            None,
            options.rate_fraction * options.rate,
            f.rate,
        )),
        None => {
            // every point coupled or noise-dominated: the decay is faster than any fit can resolve
            let resolved = curve.mean.iter().filter(|m| **m > 0.0).count();
            log::info!("rate fit skipped: only {resolved} positive points");
        }
    }
    let corollaries = check_corollaries(ensemble, df, initial, options.rate, times, options.corollary_tol)?;
    for row in &corollaries {
        verdicts.push(Verdict::new(
            "tv-envelope",
            Some(row.time),
            row.tv_surrogate,
            row.tv_bound,
        ));
        verdicts.push(Verdict::new("w1-envelope", Some(row.time), row.w1, row.w1_bound));
    }
    let passed = verdicts.iter().all(|v| v.passed) && !ensemble.flagged;
    Ok(ContractionReport {
        times: times.to_vec(),
        curve,
        initial_ef,
        envelope,
        fit,
        corollaries,
        options,
        n_paths: ensemble.paths.len(),
        failed_paths: ensemble.failed_paths,
        verdicts,
        passed,
    })
}

/// Settings of [`invariant_measure_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOptions {
    pub burn_in: f64,
    /// Length of the occupation record after burn-in.
    pub horizon: f64,
    /// Spacing of the occupation record.
    pub spacing: f64,
    /// Times at which the ensemble law is compared with the reference.
    pub times: Vec<f64>,
    /// Start of the long reference path.
    pub reference_start: Vec<f64>,
}

impl ProbeOptions {
    pub fn dyadic(burn_in: f64, horizon: f64, spacing: f64, t_max: f64, start: Vec<f64>) -> Self {
        let mut times = Vec::new();
        let mut t = t_max;
        while t >= 0.125 {
            times.push(t);
            t /= 2.0;
        }
        times.reverse();
        Self {
            burn_in,
            horizon,
            spacing,
            times,
            reference_start: start,
        }
    }
}

/// Distances to the long-run law at the probe times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub noise_floor: f64,
    pub fit: Option<RateFit>,
    /// Distances above the noise floor decrease in time.
    pub monotone: bool,
    pub reference_size: usize,
}

/// Compares the law at time `t` of an ensemble started from `cfg.initial`
/// with a long single-path occupation sample standing in for the invariant
/// law. One-dimensional only.
pub fn invariant_measure_probe(cfg: &SimConfig, opts: &ProbeOptions) -> Result<ProbeReport> {
    if cfg.measure.dimension() != 1 {
        return Err(Error::Config("the invariant-measure probe is one-dimensional".into()));
    }
    if !(opts.spacing > 0.0 && opts.horizon > opts.spacing && opts.burn_in >= 0.0) {
        return Err(Error::Config(
            "probe needs burn_in >= 0 and horizon > spacing > 0".into(),
        ));
    }
    if opts.times.is_empty() || opts.times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("probe times must be increasing".into()));
    }
    let n_ref = (opts.horizon / opts.spacing).floor() as usize;
    let mut long = cfg.clone();
    long.initial = InitialLaw::Fixed {
        x0: opts.reference_start.clone(),
        y0: opts.reference_start.clone(),
    };
    long.sample_times = (1..=n_ref).map(|i| opts.burn_in + i as f64 * opts.spacing).collect();
    long.horizon = *long.sample_times.last().expect("non-empty");
    long.n_paths = 1;
    let reference = Simulator::new(long)?.simulate_single(0);
    if reference.failed || reference.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "the long reference path produced non-finite positions".into(),
        ));
    }
    let ref_x = reference.x;

    let mut ens_cfg = cfg.clone();
    ens_cfg.sample_times = opts.times.clone();
    ens_cfg.horizon = *opts.times.last().expect("non-empty");
    let ensemble = Simulator::new(ens_cfg)?.run_single_ensemble(None)?;
    let distances: Vec<f64> = (0..opts.times.len())
        .map(|k| w1_1d_unequal(&ensemble.x_at(k), &ref_x))
        .collect::<Result<_>>()?;

    // sampling noise: two halves of the reference, and two halves of the
    // last ensemble sample
    let even: Vec<f64> = ref_x.iter().step_by(2).copied().collect();
    let odd: Vec<f64> = ref_x.iter().skip(1).step_by(2).copied().collect();
    let last = ensemble.x_at(opts.times.len() - 1);
    let (h1, h2) = last.split_at(last.len() / 2);
    let floor = w1_1d_unequal(&even, &odd)?.max(w1_1d_unequal(h1, h2)?);

    let usable: Vec<(f64, f64)> = opts
        .times
        .iter()
        .zip(&distances)
        .filter(|(_, d)| **d > 4.0 * floor)
        .map(|(t, d)| (*t, d.ln()))
        .collect();
    let monotone = usable.windows(2).all(|w| w[1].1 < w[0].1);
    let fit = fit_log_linear(&usable).ok();
    Ok(ProbeReport {
        times: opts.times.clone(),
        distances,
        noise_floor: floor,
        fit,
        monotone,
        reference_size: ref_x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn curve(times: &[f64], f: impl Fn(f64) -> f64) -> DecayCurve {
        DecayCurve {
            times: times.to_vec(),
            mean: times.iter().map(|t| f(*t)).collect(),
            stderr: vec![0.0; times.len()],
        }
    }

    #[test]
    fn exact_exponential_fit() {
        let c = curve(&[0.5, 1.0, 2.0, 4.0], |t| 3.0 * (-0.7 * t).exp());
        let fit = fit_rate(&c).unwrap();
        assert_abs_diff_eq!(fit.rate, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn constant_curve_has_zero_rate() {
        let c = curve(&[0.0, 1.0, 2.0], |_| 2.0);
        assert_abs_diff_eq!(fit_rate(&c).unwrap().rate, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn fit_needs_three_points() {
        let c = curve(&[0.0, 1.0], |t| (-t).exp());
        assert!(fit_rate(&c).is_err());
        let mut noisy = curve(&[0.0, 1.0, 2.0], |t| (-t).exp());
        noisy.stderr = vec![0.0, 0.0, 1.0];
        assert!(fit_rate(&noisy).is_err());
    }

    #[test]
    fn w1_small_cases() {
        assert_eq!(empirical_w1_1d(&[1.0, 2.0], &[2.0, 1.0]).unwrap(), 0.0);
        assert_eq!(empirical_w1_1d(&[0.0; 5], &[3.0; 5]).unwrap(), 3.0);
        assert_eq!(empirical_w1_1d(&[0.0, 1.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert!(empirical_w1_1d(&[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn unequal_w1_matches_equal_case() {
        let a = [0.3, -1.0, 2.5, 0.0];
        let b = [1.0, 1.5, -0.5, 0.2];
        assert_abs_diff_eq!(
            w1_1d_unequal(&a, &b).unwrap(),
            empirical_w1_1d(&a, &b).unwrap(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(w1_1d_unequal(&[0.0], &[1.0, 3.0]).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn hungarian_small() {
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let a = hungarian(&cost, 3);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i * 3 + j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn ks_statistics() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(ks_two_sample(&a, &a).unwrap().statistic, 0.0);
        let b: Vec<f64> = (0..100).map(|i| i as f64 + 1000.0).collect();
        assert_eq!(ks_two_sample(&a, &b).unwrap().statistic, 1.0);
        let u: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let r = ks_one_sample(&u, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.statistic <= 0.0005 + 1e-12);
        assert!(r.passed);
    }
}
