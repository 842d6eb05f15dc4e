//! The TOML run configuration and its translation into core types.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use levycouple::contraction::KConvention;
use levycouple::coupling_sim::{InitialLaw, SimConfig, DEFAULT_BLOWUP, DEFAULT_TIME_STEP};
use levycouple::drift::{DriftSpec, KappaProfile};
use levycouple::levy_measure::{RadialLevyMeasure, TruncationOptions};
use levycouple::metrics::ReportOptions;
use levycouple::pipeline::{Pipeline, PipelineConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub measure: MeasureSection,
    pub drift: DriftSection,
    pub distance: DistanceSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub oracle: OracleSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKindName {
    AlphaStable,
    ShellUniform,
    TabulatedRadial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    pub kind: MeasureKindName,
    #[serde(default = "one")]
    pub dimension: usize,
    pub alpha: Option<f64>,
    pub theta: Option<f64>,
    pub beta: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub density: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftKindName {
    /// `b(x) = -rate x`.
    Linear,
    /// `b(x) = x - x^3`.
    DoubleWell,
    /// Profile only: `kappa = below` on `[0, radius)`, `above` beyond.
    Step,
    /// Profile only: interpolated `kappa` values.
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    pub kind: DriftKindName,
    pub rate: Option<f64>,
    pub radius: Option<f64>,
    pub below: Option<f64>,
    pub above: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
    /// Overrides the one-sided Lipschitz constant.
    pub c_l: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceSection {
    pub epsilon: f64,
    /// Defaults to `epsilon`.
    pub delta: Option<f64>,
    pub m: Option<f64>,
    pub eta: Option<f64>,
    pub variance_budget: Option<f64>,
    #[serde(default)]
    pub k_convention: KConvention,
    pub r_max: Option<f64>,
    /// Approximate number of rows in the distance CSV.
    #[serde(default = "default_csv_rows")]
    pub csv_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default = "default_time_step")]
    pub time_step: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_times")]
    pub sample_times: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_x0")]
    pub x0: Vec<f64>,
    #[serde(default = "default_y0")]
    pub y0: Vec<f64>,
    #[serde(default = "default_blowup")]
    pub blowup: f64,
    #[serde(default)]
    pub record_jumps: bool,
    /// Number of paths written to `paths.csv`.
    #[serde(default)]
    pub trace_paths: usize,
    pub threads: Option<usize>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            n_paths: default_n_paths(),
            time_step: default_time_step(),
            horizon: default_horizon(),
            sample_times: default_times(),
            seed: 0,
            x0: default_x0(),
            y0: default_y0(),
            blowup: default_blowup(),
            record_jumps: false,
            trace_paths: 0,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_out() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Defaults to the simulation sample times.
    pub times: Option<Vec<f64>>,
    /// Rate used in the envelopes; the computed `c` when absent.
    pub rate: Option<f64>,
    #[serde(default = "default_envelope_tol")]
    pub envelope_tol: f64,
    #[serde(default = "default_rate_fraction")]
    pub rate_fraction: f64,
    #[serde(default = "default_corollary_tol")]
    pub corollary_tol: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            times: None,
            rate: None,
            envelope_tol: default_envelope_tol(),
            rate_fraction: default_rate_fraction(),
            corollary_tol: default_corollary_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_x_lo")]
    pub x_lo: f64,
    #[serde(default = "default_x_hi")]
    pub x_hi: f64,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_oracle_r_max")]
    pub r_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            x_lo: default_x_lo(),
            x_hi: default_x_hi(),
            grid_n: default_grid_n(),
            r_max: default_oracle_r_max(),
            points: default_points(),
        }
    }
}

fn one() -> usize {
    1
}
fn default_csv_rows() -> usize {
    2000
}
fn default_n_paths() -> usize {
    1000
}
fn default_time_step() -> f64 {
    DEFAULT_TIME_STEP
}
fn default_horizon() -> f64 {
    20.0
}
fn default_times() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0]
}
fn default_x0() -> Vec<f64> {
    vec![2.0]
}
fn default_y0() -> Vec<f64> {
    vec![-2.0]
}
fn default_blowup() -> f64 {
    DEFAULT_BLOWUP
}
fn default_out() -> PathBuf {
    PathBuf::from("levycouple-out")
}
fn default_envelope_tol() -> f64 {
    0.1
}
fn default_rate_fraction() -> f64 {
    0.9
}
fn default_corollary_tol() -> f64 {
    levycouple::metrics::COROLLARY_TOL
}
fn default_x_lo() -> f64 {
    -10.0
}
fn default_x_hi() -> f64 {
    10.0
}
fn default_grid_n() -> usize {
    20_001
}
fn default_oracle_r_max() -> f64 {
    5.0
}
fn default_points() -> usize {
    100
}

fn need(v: Option<f64>, what: &str) -> Result<f64> {
    v.with_context(|| format!("missing `{what}`"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid configuration {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not need the pipeline.
    pub fn validate(&self) -> Result<()> {
        self.measure()?;
        self.drift_spec()?;
        let d = &self.distance;
        if !(d.epsilon > 0.0) {
            bail!("[distance] epsilon must be positive");
        }
        if let Some(b) = d.variance_budget {
            if !(b > 0.0) {
                bail!("[distance] variance_budget must be positive");
            }
        }
        let s = &self.simulation;
        let dim = self.measure.dimension;
        if s.x0.len() != dim || s.y0.len() != dim {
            bail!("[simulation] x0 and y0 must have {dim} coordinates");
        }
        if !(s.time_step > 0.0) || !(s.horizon >= 0.0) {
            bail!("[simulation] needs time_step > 0 and horizon >= 0");
        }
        if s.sample_times.windows(2).any(|w| !(w[1] > w[0])) || s.sample_times.iter().any(|t| !(*t >= 0.0)) {
            bail!("[simulation] sample_times must be nonnegative and increasing");
        }
        if let Some(t) = &self.verify.times {
            if t.windows(2).any(|w| !(w[1] > w[0])) || t.iter().any(|t| !(*t >= 0.0)) {
                bail!("[verify] times must be nonnegative and increasing");
            }
        }
        if self.oracle.grid_n < 2 || !(self.oracle.x_hi > self.oracle.x_lo) || !(self.oracle.r_max > 0.0) {
            bail!("[oracle] needs grid_n >= 2, x_lo < x_hi and r_max > 0");
        }
        Ok(())
    }

    pub fn measure(&self) -> Result<RadialLevyMeasure> {
        let m = &self.measure;
        let mu = match m.kind {
            MeasureKindName::AlphaStable => {
                RadialLevyMeasure::alpha_stable(m.dimension, need(m.alpha, "measure.alpha")?)?
            }
            MeasureKindName::ShellUniform => {
                if m.dimension != 1 {
                    bail!("shell-uniform measures are one-dimensional");
                }
                RadialLevyMeasure::shell_uniform(need(m.theta, "measure.theta")?, need(m.beta, "measure.beta")?)?
            }
            MeasureKindName::TabulatedRadial => RadialLevyMeasure::tabulated(
                m.dimension,
                m.radii.clone().context("missing `measure.radii`")?,
                m.density.clone().context("missing `measure.density`")?,
            )?,
        };
        Ok(mu)
    }

    pub fn drift_spec(&self) -> Result<DriftSpec> {
        let d = &self.drift;
        let dim = self.measure.dimension;
        let spec = match d.kind {
            DriftKindName::Linear => DriftSpec::linear(dim, need(d.rate, "drift.rate")?)?,
            DriftKindName::DoubleWell => {
                if dim != 1 {
                    bail!("the double-well drift is one-dimensional");
                }
                DriftSpec::double_well()
            }
            DriftKindName::Step => {
                let radius = need(d.radius, "drift.radius")?;
                let kappa = KappaProfile::Step {
                    radius,
                    below: need(d.below, "drift.below")?,
                    above: need(d.above, "drift.above")?,
                };
                DriftSpec::from_profile(dim, kappa, 100.0 * radius.max(1.0))?
            }
            DriftKindName::Tabulated => {
                let radii = d.radii.clone().context("missing `drift.radii`")?;
                let r_max = 100.0 * radii.last().copied().unwrap_or(1.0).max(1.0);
                let kappa = KappaProfile::Tabulated {
                    radii,
                    values: d.values.clone().context("missing `drift.values`")?,
                };
                DriftSpec::from_profile(dim, kappa, r_max)?
            }
        };
        Ok(match d.c_l {
            Some(c) => spec.with_c_l(c)?,
            None => spec,
        })
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        let d = &self.distance;
        let mut truncation = TruncationOptions::default();
        if let Some(b) = d.variance_budget {
            truncation.variance_budget = b;
        }
        PipelineConfig {
            epsilon: d.epsilon,
            delta: d.delta.unwrap_or(d.epsilon),
            m: d.m,
            eta: d.eta,
            truncation,
            k_convention: d.k_convention,
            r_max: d.r_max,
        }
    }

    /// Simulation settings on the pipeline's truncation, sampled at `times`.
    pub fn sim_config(&self, p: &Pipeline, times: &[f64]) -> SimConfig {
        let s = &self.simulation;
        let initial = InitialLaw::Fixed {
            x0: s.x0.clone(),
            y0: s.y0.clone(),
        };
        let mut cfg = SimConfig::new(p.measure.clone(), p.truncation, p.drift.clone(), initial);
        cfg.time_step = s.time_step;
        cfg.horizon = s.horizon.max(times.last().copied().unwrap_or(0.0));
        cfg.sample_times = times.to_vec();
        cfg.n_paths = s.n_paths;
        cfg.base_seed = s.seed;
        cfg.blowup = s.blowup;
        cfg.record_jumps = s.record_jumps;
        cfg
    }

    pub fn verify_times(&self) -> Vec<f64> {
        self.verify
            .times
            .clone()
            .unwrap_or_else(|| self.simulation.sample_times.clone())
    }

    pub fn report_options(&self, c: f64) -> ReportOptions {
        let v = &self.verify;
        ReportOptions {
            rate: v.rate.unwrap_or(c),
            envelope_tol: v.envelope_tol,
            rate_fraction: v.rate_fraction,
            corollary_tol: v.corollary_tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[measure]
kind = "alpha-stable"
alpha = 1.5

[drift]
kind = "linear"
rate = 1.0

[distance]
epsilon = 0.5
"#;

    #[test]
    fn defaults_fill_optional_sections() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.measure.dimension, 1);
        assert_eq!(cfg.simulation.n_paths, 1000);
        assert_eq!(cfg.pipeline_config().delta, 0.5);
        assert_eq!(cfg.distance.k_convention, KConvention::Proof);
        assert_eq!(cfg.verify_times(), vec![0.5, 1.0, 2.0, 4.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[output]\ndirectory = \"x\"\n");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn missing_parameters_are_reported() {
        let text = MINIMAL.replace("alpha = 1.5", "");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(format!("{err:#}").contains("measure.alpha"));
    }

    #[test]
    fn initial_points_must_match_dimension() {
        let text = MINIMAL.replace("alpha = 1.5", "alpha = 1.5\ndimension = 2");
        assert!(RunConfig::parse(&text).is_err());
        let ok = format!("{text}\n[simulation]\nx0 = [1.0, 0.0]\ny0 = [-1.0, 0.0]\n");
        assert!(RunConfig::parse(&ok).is_ok());
    }

    #[test]
    fn step_profile_has_zero_c_l() {
        let text = MINIMAL.replace(
            "kind = \"linear\"\nrate = 1.0",
            "kind = \"step\"\nradius = 1.0\nbelow = 0.0\nabove = 2.8284271247461903",
        );
        let cfg = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg.drift_spec().unwrap().c_l(), 0.0);
    }
}
