//! End-to-end construction of the contraction constants from a jump
//! measure, a drift and the pair `(eps, delta)`.

use serde::{Deserialize, Serialize};

use crate::contraction::{DistanceConstants, DistanceFunction, DistanceParams, KConvention};
use crate::drift::{default_r_max, radius_r0, radius_r1, DriftSpec};
use crate::error::{Error, Result};
use crate::levy_measure::{
    c_delta_overlap, c_epsilon, select_eta, select_truncation_m, RadialLevyMeasure, TruncationOptions, TruncationParams,
};

/// Inputs of the pipeline beyond the measure and the drift.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Fixed truncation radius; searched when `None`.
    pub m: Option<f64>,
    /// Fixed small-jump cutoff; derived from the variance budget when `None`.
    pub eta: Option<f64>,
    pub truncation: TruncationOptions,
    pub k_convention: KConvention,
    /// Search bound for `R0`, `R1`; `100 max(1, R0)` when `None`.
    pub r_max: Option<f64>,
}

impl PipelineConfig {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        Self {
            epsilon,
            delta,
            m: None,
            eta: None,
            truncation: TruncationOptions::default(),
            k_convention: KConvention::Proof,
            r_max: None,
        }
    }

    pub fn with_variance_budget(mut self, budget: f64) -> Self {
        self.truncation.variance_budget = budget;
        self
    }

    pub fn with_k_convention(mut self, convention: KConvention) -> Self {
        self.k_convention = convention;
        self
    }
}

/// Everything the pipeline produced.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub measure: RadialLevyMeasure,
    pub drift: DriftSpec,
    pub truncation: TruncationParams,
    pub distance: DistanceFunction,
    pub r_max: f64,
    pub jump_rate: f64,
}

/// Serializable summary of a pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    #[serde(flatten)]
    pub constants: DistanceConstants,
    pub eta: f64,
    pub jump_rate: f64,
    pub r_max: f64,
}

impl Pipeline {
    pub fn constants(&self) -> &DistanceConstants {
        self.distance.constants()
    }

    pub fn report(&self) -> ConstantsReport {
        ConstantsReport {
            constants: *self.distance.constants(),
            eta: self.truncation.eta,
            jump_rate: self.jump_rate,
            r_max: self.r_max,
        }
    }
}

/// Computes `C_eps`, `C_delta`, `m`, `eta`, `R0`, `R1` and the distance
/// function. Assumptions are checked in the order 4, 3, 5.
pub fn build_pipeline(measure: &RadialLevyMeasure, drift: &DriftSpec, cfg: &PipelineConfig) -> Result<Pipeline> {
    if !(cfg.epsilon > 0.0 && cfg.delta >= cfg.epsilon) {
        return Err(Error::Config(format!(
            "need 0 < eps <= delta, got eps={}, delta={}",
            cfg.epsilon, cfg.delta
        )));
    }
    if drift.dimension() != measure.dimension() {
        return Err(Error::Config(format!(
            "drift dimension {} does not match measure dimension {}",
            drift.dimension(),
            measure.dimension()
        )));
    }
    let c_eps = c_epsilon(measure, cfg.epsilon)?;
    let c_delta = c_delta_overlap(measure, cfg.delta, f64::INFINITY)?;
    if !(c_delta > 0.0) {
        return Err(Error::feasibility(
            3,
            format!(
                "the overlap of q with its translates vanishes for some 0 < |x| <= delta = {}",
                cfg.delta
            ),
        ));
    }
    let truncation = match cfg.m {
        Some(m) => {
            let eta = match cfg.eta {
                Some(eta) => eta,
                None => select_eta(measure, m, cfg.truncation.variance_budget * c_eps)?,
            };
            TruncationParams::new(m, eta)?
        }
        None => {
            let t = select_truncation_m(measure, cfg.epsilon, cfg.delta, cfg.truncation)?;
            match cfg.eta {
                Some(eta) => TruncationParams::new(t.m, eta)?,
                None => t,
            }
        }
    };
    let c_delta_m = c_delta_overlap(measure, cfg.delta, truncation.m)?;
    if !(c_delta_m > 0.0) {
        return Err(Error::feasibility(
            3,
            format!("the overlap truncated at m = {} vanishes", truncation.m),
        ));
    }
    let kappa = drift.kappa();
    let r_max = match cfg.r_max {
        Some(r) => r,
        None => default_r_max(kappa)?,
    };
    let r0 = radius_r0(kappa, r_max)?;
    let r1 = radius_r1(kappa, r0, cfg.epsilon, c_eps, r_max)?;
    log::debug!(
        "C_eps={c_eps} C_delta={c_delta} m={} eta={} R0={r0} R1={r1}",
        truncation.m,
        truncation.eta
    );
    let params = DistanceParams {
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        m: truncation.m,
        c_eps,
        c_delta,
        c_delta_m,
        r0,
        r1,
        c_l: drift.c_l(),
        k_convention: cfg.k_convention,
    };
    let distance = DistanceFunction::build(&params, kappa)?;
    let jump_rate = measure.tail_mass(truncation.eta)?;
    Ok(Pipeline {
        measure: measure.clone(),
        drift: drift.clone(),
        truncation,
        distance,
        r_max,
        jump_rate,
    })
}

/// Rate `c` for each `eps = delta` on `grid`, with the best entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonScan {
    pub entries: Vec<(f64, Option<f64>)>,
    pub best: Option<(f64, f64)>,
}

/// Evaluates `min(c1 / 2K, C_delta / 4)` along `eps = delta`; infeasible
/// points are recorded as `None`. The maximizer is not claimed optimal
/// outside the grid.
pub fn scan_epsilon(
    measure: &RadialLevyMeasure,
    drift: &DriftSpec,
    base: &PipelineConfig,
    grid: &[f64],
) -> EpsilonScan {
    let entries: Vec<(f64, Option<f64>)> = grid
        .iter()
        .map(|&e| {
            let cfg = PipelineConfig {
                epsilon: e,
                delta: e,
                ..base.clone()
            };
            let c = build_pipeline(measure, drift, &cfg).ok().map(|p| p.constants().c);
            (e, c)
        })
        .collect();
    let best = entries
        .iter()
        .filter_map(|(e, c)| c.map(|c| (*e, c)))
        .fold(None, |acc: Option<(f64, f64)>, (e, c)| match acc {
            Some((_, bc)) if bc >= c => acc,
            _ => Some((e, c)),
        });
    EpsilonScan { entries, best }
}

/// Maximizer of `C_eps / (2 R^2 + 4 eps R)` for the one-dimensional
/// alpha-stable measure: `(2 - alpha) R / (2 alpha - 2)`, for `alpha > 1`.
pub fn stable_step_epsilon(alpha: f64, radius: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) || !(radius > 0.0) {
        return Err(Error::Domain(format!(
            "needs 1 < alpha < 2 and R > 0, got alpha={alpha}, R={radius}"
        )));
    }
    Ok((2.0 - alpha) * radius / (2.0 * alpha - 2.0))
}

/// Conservative closed-form rate for `kappa = M 1[r >= R]` with the
/// one-dimensional alpha-stable measure: `C_eps / (2 R^2 + 4 eps R) / 2`.
pub fn stable_step_rate_floor(alpha: f64, radius: f64, epsilon: f64) -> f64 {
    let c_eps = 2.0 / (2.0 - alpha) * (epsilon / 4.0).powf(2.0 - alpha);
    c_eps / (2.0 * radius * radius + 4.0 * epsilon * radius) / 2.0
}
