//! Drift fields, their dissipativity profile `kappa` and the radii `R0`, `R1`.
//!
//! `kappa(r)` is the worst-case normalized dissipativity
//! `inf { -<b(x) - b(y), x - y> / |x - y|^2 : |x - y| = r }`; everything
//! downstream consumes it as a one-dimensional profile.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points on the uniform grids used for `R0`, `R1` and `C_L`.
pub const RADIUS_GRID: usize = 100_001;
/// Bisection tolerance for `R0` and `R1`.
pub const RADIUS_TOL: f64 = 1e-6;
/// Slack added to a grid-estimated one-sided Lipschitz constant.
pub const C_L_SLACK: f64 = 1e-9;

/// User-supplied profile.
#[derive(Clone)]
pub struct CustomKappa(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for CustomKappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomKappa(..)")
    }
}

/// The profile `kappa: [0, inf) -> R`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KappaProfile {
    Constant {
        value: f64,
    },
    /// `below` on `[0, radius)`, `above` on `[radius, inf)`.
    Step {
        radius: f64,
        below: f64,
        above: f64,
    },
    /// `r^2/4 - 1`, the profile of `b(x) = x - x^3`.
    DoubleWell,
    /// Linear interpolation, constant beyond the last radius.
    Tabulated {
        radii: Vec<f64>,
        values: Vec<f64>,
    },
    #[serde(skip)]
    Custom(CustomKappa),
}

impl KappaProfile {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        KappaProfile::Custom(CustomKappa(Arc::new(f)))
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            KappaProfile::Constant { value } => *value,
            KappaProfile::Step { radius, below, above } => {
                if r >= *radius {
                    *above
                } else {
                    *below
                }
            }
            KappaProfile::DoubleWell => r * r / 4.0 - 1.0,
            KappaProfile::Tabulated { radii, values } => {
                let k = radii.partition_point(|&x| x <= r);
                if k == 0 {
                    values[0]
                } else if k >= radii.len() {
                    values[values.len() - 1]
                } else {
                    let t = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
                    values[k - 1] + t * (values[k] - values[k - 1])
                }
            }
            KappaProfile::Custom(CustomKappa(f)) => f(r),
        }
    }

    /// Negative part `kappa^-(r) = max(0, -kappa(r))`.
    pub fn negative_part(&self, r: f64) -> f64 {
        (-self.eval(r)).max(0.0)
    }

    fn validate(&self) -> Result<()> {
        match self {
            KappaProfile::Step { radius, .. } if !(*radius >= 0.0) => {
                Err(Error::Domain(format!("step radius must be nonnegative, got {radius}")))
            }
            KappaProfile::Tabulated { radii, values } => {
                if radii.len() < 2 || radii.len() != values.len() {
                    return Err(Error::Domain("tabulated kappa needs matching radii and values".into()));
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Domain("tabulated kappa radii must be increasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Drift vector field used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DriftField {
    /// `b(x) = -rate * x`.
    Linear { rate: f64 },
    /// `b(x) = x - x^3`, one-dimensional.
    DoubleWell,
    /// Only a `kappa` profile is known; cannot be simulated.
    ProfileOnly,
}

/// Drift together with its `kappa` profile and one-sided Lipschitz constant.
#[derive(Debug, Clone)]
pub struct DriftSpec {
    dimension: usize,
    field: DriftField,
    kappa: KappaProfile,
    c_l: f64,
}

impl DriftSpec {
    /// `b(x) = -rate x`, for which `kappa` is the constant `rate`.
    pub fn linear(dimension: usize, rate: f64) -> Result<Self> {
        if dimension == 0 || !rate.is_finite() {
            return Err(Error::Domain("linear drift needs d >= 1 and a finite rate".into()));
        }
        Ok(Self {
            dimension,
            field: DriftField::Linear { rate },
            kappa: KappaProfile::Constant { value: rate },
            c_l: (-rate).max(0.0),
        })
    }

    /// `b(x) = x - x^3` on the line; `<b(x) - b(y), x - y> <= |x - y|^2`.
    pub fn double_well() -> Self {
        Self {
            dimension: 1,
            field: DriftField::DoubleWell,
            kappa: KappaProfile::DoubleWell,
            c_l: 1.0,
        }
    }

    /// Profile-only drift; `C_L` is estimated on `[0, r_max]`.
    pub fn from_profile(dimension: usize, kappa: KappaProfile, r_max: f64) -> Result<Self> {
        kappa.validate()?;
        let c_l = estimate_c_l(&kappa, r_max);
        Ok(Self {
            dimension,
            field: DriftField::ProfileOnly,
            kappa,
            c_l,
        })
    }

    /// `kappa = below` on `[0, radius)`, `above` beyond.
    pub fn step_profile(radius: f64, below: f64, above: f64) -> Result<Self> {
        Self::from_profile(1, KappaProfile::Step { radius, below, above }, 100.0 * radius.max(1.0))
    }

    /// Replaces the one-sided Lipschitz constant.
    pub fn with_c_l(mut self, c_l: f64) -> Result<Self> {
        if !(c_l >= 0.0 && c_l.is_finite()) {
            return Err(Error::Domain(format!("C_L must be finite and nonnegative, got {c_l}")));
        }
        self.c_l = c_l;
        Ok(self)
    }

    /// Replaces the `kappa` profile, keeping the vector field.
    pub fn with_kappa(mut self, kappa: KappaProfile) -> Result<Self> {
        kappa.validate()?;
        self.kappa = kappa;
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn field(&self) -> DriftField {
        self.field
    }

    pub fn kappa(&self) -> &KappaProfile {
        &self.kappa
    }

    pub fn c_l(&self) -> f64 {
        self.c_l
    }

    pub fn can_simulate(&self) -> bool {
        !matches!(self.field, DriftField::ProfileOnly)
    }

    /// Writes `b(x)` into `out`.
    #[inline]
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        match self.field {
            DriftField::Linear { rate } => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = -rate * xi;
                }
            }
            DriftField::DoubleWell => out[0] = x[0] - x[0] * x[0] * x[0],
            DriftField::ProfileOnly => out.iter_mut().for_each(|o| *o = 0.0),
        }
    }

    /// `b` as a scalar function, for one-dimensional drifts.
    pub fn eval_1d(&self, x: f64) -> f64 {
        let mut out = [0.0];
        self.eval(&[x], &mut out);
        out[0]
    }
}

/// `sup kappa^-` on a uniform grid of `[0, r_max]`, plus a small slack when positive.
pub fn estimate_c_l(kappa: &KappaProfile, r_max: f64) -> f64 {
    let n = RADIUS_GRID;
    let sup = (0..n)
        .map(|i| kappa.negative_part(r_max * i as f64 / (n - 1) as f64))
        .fold(0.0, f64::max);
    if sup > 0.0 {
        sup + C_L_SLACK
    } else {
        0.0
    }
}

/// Brute-force `kappa(r)` for a one-dimensional drift: the minimum over a
/// uniform grid of `x` in `[x_lo, x_hi]` of `-(b(x + r) - b(x)) / r`.
pub fn kappa_oracle_1d<F>(b: F, r: f64, x_lo: f64, x_hi: f64, grid_n: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(r > 0.0) || grid_n < 2 || !(x_hi > x_lo) {
        return Err(Error::Domain(format!(
            "kappa oracle needs r > 0, grid_n >= 2 and x_lo < x_hi (r={r}, n={grid_n})"
        )));
    }
    let step = (x_hi - x_lo) / (grid_n - 1) as f64;
    let mut best = f64::INFINITY;
    for i in 0..grid_n {
        let x = x_lo + step * i as f64;
        let (bx, by) = (b(x + r), b(x));
        if !(bx.is_finite() && by.is_finite()) {
            return Err(Error::Domain(format!("drift is not finite near x = {x}")));
        }
        best = best.min(-(bx - by) / r);
    }
    Ok(best)
}

/// Uniform grid with suffix minima of `kappa`.
struct SuffixGrid {
    lo: f64,
    step: f64,
    suffix_min: Vec<f64>,
}

impl SuffixGrid {
    fn new(kappa: &KappaProfile, lo: f64, hi: f64) -> Self {
        let n = RADIUS_GRID;
        let step = (hi - lo) / (n - 1) as f64;
        let mut suffix_min = vec![0.0; n];
        let mut acc = f64::INFINITY;
        for i in (0..n).rev() {
            acc = acc.min(kappa.eval(lo + step * i as f64));
            suffix_min[i] = acc;
        }
        Self { lo, step, suffix_min }
    }

    fn at(&self, i: usize) -> f64 {
        self.lo + self.step * i as f64
    }

    /// First grid index where `feasible(r, suffix_min)` holds, refined by
    /// bisection on the cell before it; `None` if nowhere feasible.
    fn first_feasible<P>(&self, kappa: &KappaProfile, feasible: P) -> Option<f64>
    where
        P: Fn(f64, f64) -> bool,
    {
        let i = (0..self.suffix_min.len()).find(|&i| feasible(self.at(i), self.suffix_min[i]))?;
        if i == 0 {
            return Some(self.lo);
        }
        let tail = self.suffix_min[i];
        let (mut lo, mut hi) = (self.at(i - 1), self.at(i));
        while hi - lo > RADIUS_TOL {
            let mid = 0.5 * (lo + hi);
            if feasible(mid, kappa.eval(mid).min(tail)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }
}

/// Liminf of `kappa` stays positive on the last decade of `[0, r_max]`.
pub fn check_assumption5(kappa: &KappaProfile, r_max: f64) -> Result<()> {
    let n = 1001;
    let lo = 0.9 * r_max;
    let worst = (0..n)
        .map(|i| kappa.eval(lo + (r_max - lo) * i as f64 / (n - 1) as f64))
        .fold(f64::INFINITY, f64::min);
    if worst > 0.0 {
        Ok(())
    } else {
        Err(Error::feasibility(
            5,
            format!("kappa is not positive at infinity: min over [{lo}, {r_max}] is {worst}"),
        ))
    }
}

/// Default search bound `100 max(1, R0)` with `R0` located on `[0, 100]`.
pub fn default_r_max(kappa: &KappaProfile) -> Result<f64> {
    let coarse = SuffixGrid::new(kappa, 0.0, 100.0)
        .first_feasible(kappa, |_, k| k >= 0.0)
        .ok_or_else(|| Error::feasibility(5, "kappa takes negative values arbitrarily far out on [0, 100]"))?;
    Ok(100.0 * coarse.max(1.0))
}

/// `R0 = inf { R >= 0 : kappa(r) >= 0 for all r >= R }`, searched on `[0, r_max]`.
pub fn radius_r0(kappa: &KappaProfile, r_max: f64) -> Result<f64> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::Domain(format!("r_max must be positive, got {r_max}")));
    }
    check_assumption5(kappa, r_max)?;
    SuffixGrid::new(kappa, 0.0, r_max)
        .first_feasible(kappa, |_, k| k >= 0.0)
        .ok_or_else(|| Error::feasibility(5, format!("kappa is negative arbitrarily close to r_max = {r_max}")))
}

/// `R1 = inf { R >= R0 + eps : kappa(r) >= 2 C_eps / ((R - R0) R) for all r >= R }`.
pub fn radius_r1(kappa: &KappaProfile, r0: f64, epsilon: f64, c_eps: f64, r_max: f64) -> Result<f64> {
    if !(c_eps > 0.0) || !(epsilon > 0.0) || !r0.is_finite() {
        return Err(Error::Domain(format!(
            "R1 needs finite R0, eps > 0 and C_eps > 0 (R0={r0}, eps={epsilon}, C_eps={c_eps})"
        )));
    }
    let lo = r0 + epsilon;
    if !(r_max > lo) {
        return Err(Error::Domain(format!("r_max = {r_max} must exceed R0 + eps = {lo}")));
    }
    let threshold = |r: f64| 2.0 * c_eps / ((r - r0) * r);
    SuffixGrid::new(kappa, lo, r_max)
        .first_feasible(kappa, |r, k| k >= threshold(r))
        .ok_or_else(|| {
            Error::feasibility(
                5,
                format!(
                    "kappa never dominates 2 C_eps / ((R - R0) R) on [{lo}, {r_max}]; \
                     at r_max the bound is {:.3e} while kappa(r_max) = {:.3e}",
                    threshold(r_max),
                    kappa.eval(r_max)
                ),
            )
        })
}

/// `true` when `kappa(r) >= 2 C_eps / ((R - R0) R)` on a grid of `[R, r_max]`.
pub fn r1_condition_holds(kappa: &KappaProfile, r: f64, r0: f64, c_eps: f64, r_max: f64) -> bool {
    let thr = 2.0 * c_eps / ((r - r0) * r);
    let n = RADIUS_GRID;
    (0..n).all(|i| kappa.eval(r + (r_max - r) * i as f64 / (n - 1) as f64) >= thr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    #[test]
    fn oracle_linear_and_double_well() {
        let lin = DriftSpec::linear(1, 3.0).unwrap();
        let k = kappa_oracle_1d(|x| lin.eval_1d(x), 0.7, -5.0, 5.0, 2001).unwrap();
        assert_abs_diff_eq!(k, 3.0, epsilon = 1e-12);
        let dw = DriftSpec::double_well();
        let k2 = kappa_oracle_1d(|x| dw.eval_1d(x), 2.0, -5.0, 5.0, 20001).unwrap();
        assert_abs_diff_eq!(k2, 0.0, epsilon = 1e-9);
        let k1 = kappa_oracle_1d(|x| dw.eval_1d(x), 1.0, -5.0, 5.0, 20001).unwrap();
        assert_abs_diff_eq!(k1, -0.75, epsilon = 1e-9);
    }

    #[test]
    fn oracle_rejects_bad_input() {
        assert!(kappa_oracle_1d(|x| x, 0.0, -1.0, 1.0, 10).is_err());
        assert!(kappa_oracle_1d(|x| x, 1.0, -1.0, 1.0, 1).is_err());
        assert!(kappa_oracle_1d(|x: f64| 1.0 / x.abs().min(0.0), 1.0, -1.0, 1.0, 11).is_err());
    }

    #[test]
    fn r0_examples() {
        let constant = KappaProfile::Constant { value: 2.0 };
        assert_eq!(radius_r0(&constant, 100.0).unwrap(), 0.0);
        let dw = KappaProfile::DoubleWell;
        assert_abs_diff_eq!(radius_r0(&dw, 200.0).unwrap(), 2.0, epsilon = 2e-6);
        // nonnegative everywhere, so the indicator profile has R0 = 0
        let step = KappaProfile::Step {
            radius: 1.0,
            below: 0.0,
            above: 2.0 * SQRT_2,
        };
        assert_eq!(radius_r0(&step, 100.0).unwrap(), 0.0);
        let signed = KappaProfile::Step {
            radius: 1.5,
            below: -1.0,
            above: 1.0,
        };
        assert_abs_diff_eq!(radius_r0(&signed, 100.0).unwrap(), 1.5, epsilon = 2e-6);
    }

    #[test]
    fn r0_needs_positive_tail() {
        let bad = KappaProfile::Constant { value: -1.0 };
        assert_eq!(radius_r0(&bad, 100.0).unwrap_err().assumption(), Some(5));
        let zero = KappaProfile::Constant { value: 0.0 };
        assert_eq!(radius_r0(&zero, 100.0).unwrap_err().assumption(), Some(5));
    }

    #[test]
    fn r1_examples() {
        let step = KappaProfile::Step {
            radius: 1.0,
            below: 0.0,
            above: 2.0 * SQRT_2,
        };
        let r1 = radius_r1(&step, 0.0, 0.5, SQRT_2, 100.0).unwrap();
        assert_abs_diff_eq!(r1, 1.0, epsilon = 2e-6);
        let constant = KappaProfile::Constant { value: 2.0 * SQRT_2 };
        let r1 = radius_r1(&constant, 0.0, 0.5, SQRT_2, 100.0).unwrap();
        assert_abs_diff_eq!(r1, 1.0, epsilon = 2e-6);
        let large = KappaProfile::Constant { value: 100.0 };
        assert_eq!(radius_r1(&large, 0.0, 0.5, SQRT_2, 100.0).unwrap(), 0.5);
    }

    #[test]
    fn r1_double_well_is_tight() {
        let dw = KappaProfile::DoubleWell;
        let r0 = radius_r0(&dw, 200.0).unwrap();
        let r1 = radius_r1(&dw, r0, 0.5, SQRT_2, 200.0).unwrap();
        assert!(r1 >= r0 + 0.5);
        assert!(r1_condition_holds(&dw, r1, r0, SQRT_2, 200.0));
        assert!(!r1_condition_holds(&dw, r1 - 1e-3, r0, SQRT_2, 200.0));
        assert!(!r1_condition_holds(&dw, r1 - 10.0 * RADIUS_TOL, r0, SQRT_2, 200.0));
    }

    #[test]
    fn c_l_defaults() {
        assert_eq!(DriftSpec::linear(2, 1.0).unwrap().c_l(), 0.0);
        assert_eq!(DriftSpec::double_well().c_l(), 1.0);
        let step = DriftSpec::step_profile(1.0, 0.0, 2.0 * SQRT_2).unwrap();
        assert_eq!(step.c_l(), 0.0);
        let signed = DriftSpec::step_profile(1.0, -0.5, 1.0).unwrap();
        assert_abs_diff_eq!(signed.c_l(), 0.5, epsilon = 1e-8);
        assert!(signed.c_l() > 0.5);
    }

    #[test]
    fn default_r_max_scales_with_r0() {
        assert_eq!(default_r_max(&KappaProfile::Constant { value: 1.0 }).unwrap(), 100.0);
        let r = default_r_max(&KappaProfile::DoubleWell).unwrap();
        assert!((r - 200.0).abs() < 1e-3);
    }

    #[test]
    fn tabulated_profile_interpolates() {
        let k = KappaProfile::Tabulated {
            radii: vec![0.0, 1.0, 2.0],
            values: vec![-1.0, 0.0, 2.0],
        };
        assert_eq!(k.eval(0.5), -0.5);
        assert_eq!(k.eval(5.0), 2.0);
        assert_abs_diff_eq!(radius_r0(&k, 100.0).unwrap(), 1.0, epsilon = 2e-6);
    }
}
