//! Event-driven simulation of the coupled pair `(X, Y)`.
//!
//! Jumps with `|v| > eta` arrive as a compound Poisson process; between
//! jump epochs both coordinates follow the drift by explicit Euler steps of
//! size at most `h`, shortened so every jump epoch and sample time is hit
//! exactly. At a jump `v` of `X`:
//!
//! * after coupling, or when `|v| > m`, `Y` receives the same jump;
//! * otherwise a uniform `u` is drawn and `Y` lands on `X`'s post-jump
//!   position if `u < rho(v, X - Y)`, or receives the mirrored jump
//!   `(I - 2 e e^T) v` with `e = (X - Y) / |X - Y|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::DriftSpec;
use crate::error::{Error, Result};
use crate::levy_measure::{norm, rho_with_cutoff, JumpSampler, RadialLevyMeasure, TruncationParams};

/// Default Euler step.
pub const DEFAULT_TIME_STEP: f64 = 1e-3;
/// Paths whose position exceeds this bound are discarded.
pub const DEFAULT_BLOWUP: f64 = 1e9;
/// Fraction of failed paths above which a run is flagged.
pub const FAILURE_FLAG_FRACTION: f64 = 1e-3;
/// Stream offset separating single-marginal runs from coupled runs.
const SINGLE_STREAM_BIT: u64 = 1 << 63;

/// Starting points of the ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialLaw {
    /// Every path starts at `(x0, y0)`.
    Fixed { x0: Vec<f64>, y0: Vec<f64> },
    /// Path `i` starts at `(x[i % len], y[i % len])`.
    Samples { x: Vec<Vec<f64>>, y: Vec<Vec<f64>> },
}

impl InitialLaw {
    pub fn fixed_1d(x0: f64, y0: f64) -> Self {
        InitialLaw::Fixed {
            x0: vec![x0],
            y0: vec![y0],
        }
    }

    fn pair(&self, index: usize) -> (&[f64], &[f64]) {
        match self {
            InitialLaw::Fixed { x0, y0 } => (x0, y0),
            InitialLaw::Samples { x, y } => (&x[index % x.len()], &y[index % y.len()]),
        }
    }

    fn validate(&self, dimension: usize) -> Result<()> {
        let ok_point = |p: &Vec<f64>| p.len() == dimension && p.iter().all(|c| c.is_finite());
        match self {
            InitialLaw::Fixed { x0, y0 } => {
                if !(ok_point(x0) && ok_point(y0)) {
                    return Err(Error::Config(format!(
                        "initial points must be finite vectors of length {dimension}"
                    )));
                }
            }
            InitialLaw::Samples { x, y } => {
                if x.is_empty() || y.is_empty() || !x.iter().chain(y).all(ok_point) {
                    return Err(Error::Config(format!(
                        "initial samples must be non-empty lists of finite vectors of length {dimension}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Everything needed to simulate an ensemble.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub measure: RadialLevyMeasure,
    pub trunc: TruncationParams,
    pub drift: DriftSpec,
    pub time_step: f64,
    /// Uncoupled paths are followed up to this time.
    pub horizon: f64,
    /// Times at which positions are recorded; sorted, within `[0, horizon]`.
    pub sample_times: Vec<f64>,
    pub n_paths: usize,
    pub base_seed: u64,
    pub initial: InitialLaw,
    pub blowup: f64,
    /// Keep the full jump log on every path.
    pub record_jumps: bool,
}

impl SimConfig {
    pub fn new(measure: RadialLevyMeasure, trunc: TruncationParams, drift: DriftSpec, initial: InitialLaw) -> Self {
        Self {
            measure,
            trunc,
            drift,
            time_step: DEFAULT_TIME_STEP,
            horizon: 1.0,
            sample_times: vec![1.0],
            n_paths: 0,
            base_seed: 0,
            initial,
            blowup: DEFAULT_BLOWUP,
            record_jumps: false,
        }
    }
}

/// What happened to `Y` at a jump of `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Coalesce,
    Reflect,
    SynchronousLarge,
    /// Same jump for both after coupling.
    Synchronous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub time: f64,
    /// Jump of `X`.
    pub v: Vec<f64>,
    /// Jump of `Y`.
    pub w: Vec<f64>,
    pub decision: Decision,
    pub x_after: Vec<f64>,
    pub y_after: Vec<f64>,
}

/// Number of jumps by decision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionCounts {
    pub coalesce: u64,
    pub reflect: u64,
    pub synchronous_large: u64,
    pub synchronous: u64,
}

impl DecisionCounts {
    fn add(&mut self, d: Decision) {
        match d {
            Decision::Coalesce => self.coalesce += 1,
            Decision::Reflect => self.reflect += 1,
            Decision::SynchronousLarge => self.synchronous_large += 1,
            Decision::Synchronous => self.synchronous += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.coalesce + self.reflect + self.synchronous_large + self.synchronous
    }
}

/// One realization of the coupled pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingPath {
    pub index: usize,
    /// Positions at the sample times, `d` entries per time.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `None` if the pair has not met by the horizon.
    pub coupling_time: Option<f64>,
    pub failed: bool,
    pub counts: DecisionCounts,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jumps: Vec<JumpRecord>,
}

impl CouplingPath {
    /// `|X_t - Y_t|` at sample index `k`.
    pub fn distance_at(&self, k: usize, dimension: usize) -> f64 {
        let x = &self.x[k * dimension..(k + 1) * dimension];
        let y = &self.y[k * dimension..(k + 1) * dimension];
        if dimension == 1 {
            (x[0] - y[0]).abs()
        } else {
            x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        }
    }

    pub fn coupled_by(&self, t: f64) -> bool {
        self.coupling_time.is_some_and(|c| c <= t)
    }
}

/// One realization of `X` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinglePath {
    pub index: usize,
    pub x: Vec<f64>,
    pub failed: bool,
}

/// Output of [`Simulator::run_ensemble`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub dimension: usize,
    pub sample_times: Vec<f64>,
    pub horizon: f64,
    pub paths: Vec<CouplingPath>,
    pub failed_paths: usize,
    /// More than 0.1% of the paths failed.
    pub flagged: bool,
}

impl Ensemble {
    /// Paths that did not blow up.
    pub fn valid_paths(&self) -> impl Iterator<Item = &CouplingPath> {
        self.paths.iter().filter(|p| !p.failed)
    }

    pub fn n_valid(&self) -> usize {
        self.paths.len() - self.failed_paths
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// `X` coordinates (first component) at sample index `k`.
    pub fn x_at(&self, k: usize) -> Vec<f64> {
        let d = self.dimension;
        self.valid_paths().map(|p| p.x[k * d]).collect()
    }

    pub fn y_at(&self, k: usize) -> Vec<f64> {
        let d = self.dimension;
        self.valid_paths().map(|p| p.y[k * d]).collect()
    }

    /// Full `X` vectors at sample index `k`.
    pub fn x_points_at(&self, k: usize) -> Vec<Vec<f64>> {
        let d = self.dimension;
        self.valid_paths().map(|p| p.x[k * d..(k + 1) * d].to_vec()).collect()
    }

    pub fn y_points_at(&self, k: usize) -> Vec<Vec<f64>> {
        let d = self.dimension;
        self.valid_paths().map(|p| p.y[k * d..(k + 1) * d].to_vec()).collect()
    }

    /// Fraction of valid paths coupled by time `t`.
    pub fn coupled_fraction(&self, t: f64) -> Result<f64> {
        let n = self.n_valid();
        if n == 0 {
            return Err(Error::EmptyEnsemble);
        }
        Ok(self.valid_paths().filter(|p| p.coupled_by(t)).count() as f64 / n as f64)
    }
}

/// Output of [`Simulator::run_single_ensemble`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleEnsemble {
    pub dimension: usize,
    pub sample_times: Vec<f64>,
    pub paths: Vec<SinglePath>,
    pub failed_paths: usize,
    pub flagged: bool,
}

impl SingleEnsemble {
    pub fn x_at(&self, k: usize) -> Vec<f64> {
        let d = self.dimension;
        self.paths.iter().filter(|p| !p.failed).map(|p| p.x[k * d]).collect()
    }
}

/// Validated configuration with a prepared jump sampler.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    sampler: JumpSampler,
}

fn flagged(failed: usize, total: usize) -> bool {
    total > 0 && failed as f64 > FAILURE_FLAG_FRACTION * total as f64
}

fn in_pool<T: Send>(threads: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(work()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        let d = cfg.measure.dimension();
        if cfg.drift.dimension() != d {
            return Err(Error::Config(format!(
                "drift dimension {} does not match measure dimension {d}",
                cfg.drift.dimension()
            )));
        }
        if !cfg.drift.can_simulate() {
            return Err(Error::Config(
                "the drift is given only through its kappa profile and cannot be simulated".into(),
            ));
        }
        if !(cfg.time_step > 0.0 && cfg.time_step.is_finite()) {
            return Err(Error::Config(format!(
                "time step must be positive, got {}",
                cfg.time_step
            )));
        }
        if !(cfg.horizon >= 0.0 && cfg.horizon.is_finite()) {
            return Err(Error::Config(format!(
                "horizon must be finite and nonnegative, got {}",
                cfg.horizon
            )));
        }
        if cfg.sample_times.windows(2).any(|w| !(w[1] > w[0]))
            || cfg.sample_times.iter().any(|t| !(*t >= 0.0 && *t <= cfg.horizon))
        {
            return Err(Error::Config(
                "sample times must be increasing and lie in [0, horizon]".into(),
            ));
        }
        if !(cfg.trunc.eta > 0.0 && cfg.trunc.eta < cfg.trunc.m) {
            return Err(Error::Config("need 0 < eta < m".into()));
        }
        if !(cfg.blowup > 0.0) {
            return Err(Error::Config("blow-up bound must be positive".into()));
        }
        cfg.initial.validate(d)?;
        let sampler = JumpSampler::new(&cfg.measure, cfg.trunc.eta)?;
        Ok(Self { cfg, sampler })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn sampler(&self) -> &JumpSampler {
        &self.sampler
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.base_seed);
        rng.set_stream(stream);
        rng
    }

    /// Explicit Euler from `t` to `to` with steps of at most `h`.
    #[inline]
    fn drift_to(&self, p: &mut [f64], buf: &mut [f64], t: f64, to: f64) {
        let span = to - t;
        if span <= 0.0 {
            return;
        }
        let n = (span / self.cfg.time_step).ceil().max(1.0);
        let dt = span / n;
        for _ in 0..n as u64 {
            self.cfg.drift.eval(p, buf);
            for (pi, bi) in p.iter_mut().zip(buf.iter()) {
                *pi += dt * bi;
            }
        }
    }

    fn out_of_bounds(&self, p: &[f64]) -> bool {
        p.iter().any(|c| !(c.abs() <= self.cfg.blowup))
    }

    /// Simulates path `index` of the coupled ensemble.
    pub fn simulate_coupled_pair(&self, index: usize) -> CouplingPath {
        let cfg = &self.cfg;
        let d = cfg.measure.dimension();
        let m = cfg.trunc.m;
        let eta = cfg.trunc.eta;
        let mut rng = self.rng(index as u64);
        let (x0, y0) = cfg.initial.pair(index);
        let mut x = x0.to_vec();
        let mut y = y0.to_vec();
        let mut buf = vec![0.0; d];
        let mut v = vec![0.0; d];
        let mut z = vec![0.0; d];
        let mut w = vec![0.0; d];
        let mut counts = DecisionCounts::default();
        let mut jumps = Vec::new();
        let mut xs = Vec::with_capacity(cfg.sample_times.len() * d);
        let mut ys = Vec::with_capacity(cfg.sample_times.len() * d);

        let mut coupling_time = (x == y).then_some(0.0);
        let mut t = 0.0;
        let mut next_jump = self.sampler.next_interarrival(&mut rng);
        let mut k = 0;
        let mut failed = false;
        loop {
            let sampling = k < cfg.sample_times.len();
            if !sampling && (coupling_time.is_some() || t >= cfg.horizon) {
                break;
            }
            let stop = if sampling { cfg.sample_times[k] } else { cfg.horizon };
            let target = next_jump.min(stop);
            self.drift_to(&mut x, &mut buf, t, target);
            if coupling_time.is_some() {
                y.copy_from_slice(&x);
            } else {
                self.drift_to(&mut y, &mut buf, t, target);
            }
            t = target;
            if self.out_of_bounds(&x) || self.out_of_bounds(&y) {
                failed = true;
                break;
            }
            if next_jump > stop {
                if sampling {
                    xs.extend_from_slice(&x);
                    ys.extend_from_slice(&y);
                    k += 1;
                    continue;
                }
                break;
            }

            let r = self.sampler.sample_jump(&mut rng, &mut v);
            let decision = if coupling_time.is_some() {
                Decision::Synchronous
            } else if r > m {
                Decision::SynchronousLarge
            } else {
                for i in 0..d {
                    z[i] = x[i] - y[i];
                }
                let u: f64 = rng.random();
                if u < rho_with_cutoff(&cfg.measure, &v, &z, m, eta) {
                    Decision::Coalesce
                } else {
                    Decision::Reflect
                }
            };
            match decision {
                Decision::Synchronous | Decision::SynchronousLarge => w.copy_from_slice(&v),
                Decision::Coalesce => {
                    for i in 0..d {
                        w[i] = x[i] + v[i] - y[i];
                    }
                }
                Decision::Reflect => {
                    if d == 1 {
                        w[0] = -v[0];
                    } else {
                        let zn = norm(&z);
                        let proj: f64 = v.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() / zn;
                        for i in 0..d {
                            w[i] = v[i] - 2.0 * proj * z[i] / zn;
                        }
                    }
                }
            }
            for i in 0..d {
                x[i] += v[i];
            }
            if decision == Decision::Coalesce {
                // exact: no floating-point test decides coupling
                y.copy_from_slice(&x);
                coupling_time = Some(t);
            } else {
                for i in 0..d {
                    y[i] += w[i];
                }
            }
            counts.add(decision);
            if cfg.record_jumps {
                jumps.push(JumpRecord {
                    time: t,
                    v: v.clone(),
                    w: w.clone(),
                    decision,
                    x_after: x.clone(),
                    y_after: y.clone(),
                });
            }
            next_jump = t + self.sampler.next_interarrival(&mut rng);
        }
        if failed {
            // keep the record shape: pad missing samples with NaN
            xs.resize(cfg.sample_times.len() * d, f64::NAN);
            ys.resize(cfg.sample_times.len() * d, f64::NAN);
        }
        CouplingPath {
            index,
            x: xs,
            y: ys,
            coupling_time,
            failed,
            counts,
            jumps,
        }
    }

    /// Simulates `X` alone on an rng stream disjoint from the coupled runs.
    pub fn simulate_single(&self, index: usize) -> SinglePath {
        let cfg = &self.cfg;
        let d = cfg.measure.dimension();
        let mut rng = self.rng(index as u64 | SINGLE_STREAM_BIT);
        let mut x = cfg.initial.pair(index).0.to_vec();
        let mut buf = vec![0.0; d];
        let mut v = vec![0.0; d];
        let mut xs = Vec::with_capacity(cfg.sample_times.len() * d);
        let mut t = 0.0;
        let mut next_jump = self.sampler.next_interarrival(&mut rng);
        let mut failed = false;
        for &stop in &cfg.sample_times {
            loop {
                let target = next_jump.min(stop);
                self.drift_to(&mut x, &mut buf, t, target);
                t = target;
                if self.out_of_bounds(&x) {
                    failed = true;
                    break;
                }
                if next_jump > stop {
                    break;
                }
                self.sampler.sample_jump(&mut rng, &mut v);
                for i in 0..d {
                    x[i] += v[i];
                }
                next_jump = t + self.sampler.next_interarrival(&mut rng);
            }
            if failed {
                break;
            }
            xs.extend_from_slice(&x);
        }
        xs.resize(cfg.sample_times.len() * d, f64::NAN);
        SinglePath { index, x: xs, failed }
    }

    /// Runs all coupled paths; `threads = None` uses the global pool.
    /// Results do not depend on the number of threads.
    pub fn run_ensemble(&self, threads: Option<usize>) -> Result<Ensemble> {
        let n = self.cfg.n_paths;
        let paths: Vec<CouplingPath> = in_pool(threads, || {
            (0..n).into_par_iter().map(|i| self.simulate_coupled_pair(i)).collect()
        })?;
        let failed_paths = paths.iter().filter(|p| p.failed).count();
        if failed_paths > 0 {
            log::warn!("{failed_paths} of {n} coupled paths exceeded the blow-up bound");
        }
        Ok(Ensemble {
            dimension: self.cfg.measure.dimension(),
            sample_times: self.cfg.sample_times.clone(),
            horizon: self.cfg.horizon,
            failed_paths,
            flagged: flagged(failed_paths, n),
            paths,
        })
    }

    /// Runs `n_paths` independent single-marginal paths.
    pub fn run_single_ensemble(&self, threads: Option<usize>) -> Result<SingleEnsemble> {
        let n = self.cfg.n_paths;
        let paths: Vec<SinglePath> = in_pool(threads, || {
            (0..n).into_par_iter().map(|i| self.simulate_single(i)).collect()
        })?;
        let failed_paths = paths.iter().filter(|p| p.failed).count();
        Ok(SingleEnsemble {
            dimension: self.cfg.measure.dimension(),
            sample_times: self.cfg.sample_times.clone(),
            failed_paths,
            flagged: flagged(failed_paths, n),
            paths,
        })
    }
}

/// Convenience wrapper: validates `cfg` and simulates one coupled path.
pub fn simulate_coupled_pair(cfg: &SimConfig, index: usize) -> Result<CouplingPath> {
    Ok(Simulator::new(cfg.clone())?.simulate_coupled_pair(index))
}

/// Convenience wrapper for a single-marginal path.
pub fn simulate_single(cfg: &SimConfig, index: usize) -> Result<SinglePath> {
    Ok(Simulator::new(cfg.clone())?.simulate_single(index))
}

/// Convenience wrapper for a full coupled ensemble.
pub fn run_ensemble(cfg: &SimConfig, threads: Option<usize>) -> Result<Ensemble> {
    Simulator::new(cfg.clone())?.run_ensemble(threads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(x0: f64, y0: f64) -> SimConfig {
        let mu = RadialLevyMeasure::alpha_stable(1, 1.5).unwrap();
        let trunc = TruncationParams::new(1.0, 0.05).unwrap();
        let drift = DriftSpec::linear(1, 1.0).unwrap();
        let mut cfg = SimConfig::new(mu, trunc, drift, InitialLaw::fixed_1d(x0, y0));
        cfg.sample_times = vec![0.0, 0.5, 1.0];
        cfg.horizon = 2.0;
        cfg.record_jumps = true;
        cfg.n_paths = 8;
        cfg
    }

    #[test]
    fn equal_start_is_synchronous() {
        let sim = Simulator::new(config(1.0, 1.0)).unwrap();
        let p = sim.simulate_coupled_pair(3);
        assert_eq!(p.coupling_time, Some(0.0));
        assert_eq!(p.x, p.y);
        assert!(p.jumps.iter().all(|j| j.decision == Decision::Synchronous));
    }

    #[test]
    fn reflection_preserves_length() {
        let sim = Simulator::new(config(2.0, -2.0)).unwrap();
        let mut reflected = 0;
        for i in 0..8 {
            for j in sim.simulate_coupled_pair(i).jumps {
                if j.decision == Decision::Reflect {
                    assert_eq!(j.w[0], -j.v[0]);
                    reflected += 1;
                }
                if j.decision != Decision::Coalesce {
                    assert_eq!(norm(&j.w), norm(&j.v));
                }
            }
        }
        assert!(reflected > 0);
    }

    #[test]
    fn reflection_in_two_dimensions() {
        let mu = RadialLevyMeasure::alpha_stable(2, 1.5).unwrap();
        let trunc = TruncationParams::new(1.0, 0.1).unwrap();
        let drift = DriftSpec::linear(2, 1.0).unwrap();
        let initial = InitialLaw::Fixed {
            x0: vec![1.0, 0.5],
            y0: vec![-1.0, 0.0],
        };
        let mut cfg = SimConfig::new(mu, trunc, drift, initial);
        cfg.record_jumps = true;
        let sim = Simulator::new(cfg).unwrap();
        let p = sim.simulate_coupled_pair(0);
        for j in p.jumps.iter().filter(|j| j.decision == Decision::Reflect) {
            let (a, b) = (norm(&j.v), norm(&j.w));
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn coupled_stays_coupled() {
        let sim = Simulator::new(config(0.3, -0.3)).unwrap();
        for i in 0..8 {
            let p = sim.simulate_coupled_pair(i);
            if let Some(tc) = p.coupling_time {
                for j in p.jumps.iter().filter(|j| j.time > tc) {
                    assert_eq!(j.x_after, j.y_after);
                    assert_eq!(j.decision, Decision::Synchronous);
                }
                for (k, &s) in sim.config().sample_times.iter().enumerate() {
                    if s >= tc {
                        assert_eq!(p.distance_at(k, 1), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_horizon_single_path() {
        let mut cfg = config(0.7, 0.0);
        cfg.horizon = 0.0;
        cfg.sample_times = vec![0.0];
        let p = simulate_single(&cfg, 0).unwrap();
        assert_eq!(p.x, vec![0.7]);
    }

    #[test]
    fn empty_ensemble() {
        let mut cfg = config(1.0, -1.0);
        cfg.n_paths = 0;
        let e = run_ensemble(&cfg, Some(1)).unwrap();
        assert!(e.is_empty());
        assert!(!e.flagged);
        assert!(e.coupled_fraction(1.0).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = config(1.0, -1.0);
        cfg.time_step = 0.0;
        assert!(Simulator::new(cfg).is_err());
        let mut cfg = config(1.0, -1.0);
        cfg.sample_times = vec![1.0, 0.5];
        assert!(Simulator::new(cfg).is_err());
        let mut cfg = config(1.0, -1.0);
        cfg.drift = DriftSpec::step_profile(1.0, 0.0, 1.0).unwrap();
        assert!(Simulator::new(cfg).is_err());
    }

    #[test]
    fn deterministic_per_index() {
        let sim = Simulator::new(config(2.0, -2.0)).unwrap();
        assert_eq!(sim.simulate_coupled_pair(5), sim.simulate_coupled_pair(5));
        assert_ne!(sim.simulate_coupled_pair(5).x, sim.simulate_coupled_pair(6).x);
    }
}
