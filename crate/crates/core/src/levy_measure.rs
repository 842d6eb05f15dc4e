//! Rotationally invariant pure-jump Lévy measures.
//!
//! A measure is described by its dimension and a radial profile `q(|v|)`.
//! From it we derive the one-dimensional marginal `nu_1`, the small-jump
//! constant `C_eps`, the overlap constant `C_delta(m)`, the coalescence
//! probability `rho` used by the mirror coupling, and a compound-Poisson
//! sampler for the jumps larger than a cutoff `eta`.

use std::cell::RefCell;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_pieces, tanh_sinh, Tolerance, DEFAULT_TOL};

/// Number of geometric displacement magnitudes used for the overlap infimum.
pub const OVERLAP_GRID: usize = 64;
/// Smallest magnitude on the overlap grid, relative to `delta`.
const OVERLAP_GRID_FLOOR: f64 = 1e-3;
/// Default residual small-jump variance budget, as a fraction of `C_eps`.
pub const DEFAULT_VARIANCE_BUDGET: f64 = 1e-3;
/// The truncation search doubles `m` at most this many times.
pub const M_SEARCH_DOUBLINGS: u32 = 16;

/// Surface area of the unit sphere `S^{n-1}` in `R^n` (2 for n = 1).
pub fn unit_sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * unit_sphere_area(n - 2),
    }
}

/// Radial density given on a grid, interpolated by a monotone cubic
/// (Fritsch–Carlson) and taken to be zero outside the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct RadialTable {
    radii: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    radii: Vec<f64>,
    density: Vec<f64>,
}

impl TryFrom<RawTable> for RadialTable {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        RadialTable::new(raw.radii, raw.density)
    }
}

impl From<RadialTable> for RawTable {
    fn from(t: RadialTable) -> Self {
        RawTable {
            radii: t.radii,
            density: t.values,
        }
    }
}

impl RadialTable {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(Error::Domain(
                "tabulated radial density needs at least two (radius, value) pairs".into(),
            ));
        }
        if radii[0] < 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "tabulated radii must be nonnegative and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || radii.iter().any(|r| !r.is_finite()) {
            return Err(Error::Domain(
                "tabulated density values must be finite and nonnegative".into(),
            ));
        }
        let slopes = pchip_slopes(&radii, &values);
        Ok(Self { radii, values, slopes })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.radii.len();
        if r < self.radii[0] || r > self.radii[n - 1] {
            return 0.0;
        }
        let i = match self.radii.partition_point(|&x| x <= r) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.radii[i], self.radii[i + 1]);
        let h = x1 - x0;
        let t = (r - x0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1;
        v.max(0.0)
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    if n == 2 {
        m[0] = d[0];
        m[1] = d[0];
        return m;
    }
    for i in 1..n - 1 {
        if d[i - 1] * d[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    m[0] = end(h[0], h[1], d[0], d[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

/// Radial profile of the jump density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureKind {
    /// `q(v) = |v|^{-d-alpha}`.
    AlphaStable {
        alpha: f64,
    },
    /// `q = 1` on `theta/beta <= |v| <= theta` (one-dimensional only).
    ShellUniform {
        theta: f64,
        beta: f64,
    },
    TabulatedRadial {
        table: RadialTable,
    },
}

/// A rotationally invariant jump measure `nu(dv) = q(|v|) dv` on `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialLevyMeasure {
    dimension: usize,
    kind: MeasureKind,
}

impl RadialLevyMeasure {
    pub fn new(dimension: usize, kind: MeasureKind) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        match &kind {
            MeasureKind::AlphaStable { alpha } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(Error::Domain(format!("alpha must lie in (0, 2), got {alpha}")));
                }
            }
            MeasureKind::ShellUniform { theta, beta } => {
                if dimension != 1 {
                    return Err(Error::Domain("shell-uniform measure is one-dimensional only".into()));
                }
                if !(*theta > 0.0 && theta.is_finite() && *beta > 1.0 && beta.is_finite()) {
                    return Err(Error::Domain(format!(
                        "shell-uniform needs theta > 0 and beta > 1, got theta={theta}, beta={beta}"
                    )));
                }
            }
            MeasureKind::TabulatedRadial { .. } => {}
        }
        let measure = Self { dimension, kind };
        if let MeasureKind::TabulatedRadial { .. } = measure.kind {
            let small = measure.radial_moment(2.0, 0.0, 1.0)?;
            let large = measure.radial_moment(0.0, 1.0, f64::INFINITY)?;
            if !(small + large).is_finite() {
                return Err(Error::Domain("tabulated measure is not a Lévy measure".into()));
            }
        }
        Ok(measure)
    }

    pub fn alpha_stable(dimension: usize, alpha: f64) -> Result<Self> {
        Self::new(dimension, MeasureKind::AlphaStable { alpha })
    }

    pub fn shell_uniform(theta: f64, beta: f64) -> Result<Self> {
        Self::new(1, MeasureKind::ShellUniform { theta, beta })
    }

    pub fn tabulated(dimension: usize, radii: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        Self::new(
            dimension,
            MeasureKind::TabulatedRadial {
                table: RadialTable::new(radii, density)?,
            },
        )
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// Stability index when the measure is alpha-stable.
    pub fn stable_alpha(&self) -> Option<f64> {
        match self.kind {
            MeasureKind::AlphaStable { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// `q` as a function of the radius `|v|`.
    pub fn radial_density(&self, r: f64) -> f64 {
        let r = r.abs();
        match &self.kind {
            MeasureKind::AlphaStable { alpha } => {
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    r.powf(-(self.dimension as f64) - alpha)
                }
            }
            MeasureKind::ShellUniform { theta, beta } => {
                if r >= theta / beta && r <= *theta {
                    1.0
                } else {
                    0.0
                }
            }
            MeasureKind::TabulatedRadial { table } => table.eval(r),
        }
    }

    pub fn density(&self, v: &[f64]) -> f64 {
        self.radial_density(norm(v))
    }

    /// Radii at which `q` is not smooth (excluding the origin).
    pub fn radial_breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            MeasureKind::AlphaStable { .. } => Vec::new(),
            MeasureKind::ShellUniform { theta, beta } => vec![theta / beta, *theta],
            MeasureKind::TabulatedRadial { table } => table.radii().to_vec(),
        }
    }

    /// Radius beyond which `q` vanishes.
    pub fn support_radius(&self) -> f64 {
        match &self.kind {
            MeasureKind::AlphaStable { .. } => f64::INFINITY,
            MeasureKind::ShellUniform { theta, .. } => *theta,
            MeasureKind::TabulatedRadial { table } => *table.radii().last().expect("non-empty"),
        }
    }

    fn is_singular_at_origin(&self) -> bool {
        matches!(self.kind, MeasureKind::AlphaStable { .. })
    }

    /// `int_{lo < |v| <= hi} |v|^k nu(dv)`.
    pub fn radial_moment(&self, k: f64, lo: f64, hi: f64) -> Result<f64> {
        if !(lo >= 0.0 && hi >= lo) {
            return Err(Error::Domain(format!("invalid radial range ({lo}, {hi}]")));
        }
        if hi == lo {
            return Ok(0.0);
        }
        let d = self.dimension as f64;
        let area = unit_sphere_area(self.dimension);
        if let MeasureKind::AlphaStable { alpha } = self.kind {
            let p = k - alpha;
            if p == 0.0 {
                return Ok(area * (hi / lo).ln());
            }
            // antiderivative r^p / p, infinite where it diverges
            let at = |r: f64| -> f64 {
                if r == 0.0 {
                    if p > 0.0 {
                        0.0
                    } else {
                        f64::NEG_INFINITY
                    }
                } else if r.is_infinite() {
                    if p < 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    r.powf(p) / p
                }
            };
            let v = at(hi) - at(lo);
            return Ok(area * if v.is_nan() { f64::INFINITY } else { v });
        }
        let support = self.support_radius();
        let hi_eff = hi.min(support);
        if hi_eff <= lo {
            return Ok(0.0);
        }
        let mut pts = vec![lo, hi_eff];
        pts.extend(self.radial_breakpoints().into_iter().filter(|b| *b > lo && *b < hi_eff));
        let integral = integrate_pieces(|r: f64| r.powf(k + d - 1.0) * self.radial_density(r), &pts, DEFAULT_TOL)?;
        Ok(area * integral)
    }

    /// Jump intensity `nu({|v| > eta})`.
    pub fn tail_mass(&self, eta: f64) -> Result<f64> {
        self.radial_moment(0.0, eta, f64::INFINITY)
    }

    /// Variance rate of the omitted jumps, `int_{|v| < eta} |v|^2 nu(dv)`.
    pub fn residual_variance(&self, eta: f64) -> Result<f64> {
        self.radial_moment(2.0, 0.0, eta)
    }

    fn has_mass_in_ball(&self, r: f64) -> Result<bool> {
        if self.is_singular_at_origin() {
            return Ok(r > 0.0);
        }
        Ok(self.radial_moment(0.0, 0.0, r)? > 0.0)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    if v.len() == 1 {
        v[0].abs()
    } else {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Density of the projection `<w, V>` of the (possibly truncated) measure
/// onto a fixed unit direction `w`.
///
/// For a truncation radius `m` the measure is first restricted to
/// `{|v| <= m}` and then projected.
#[derive(Debug, Clone)]
pub struct MarginalMeasure {
    measure: RadialLevyMeasure,
    truncation: f64,
    tol: Tolerance,
}

/// Builds the marginal evaluator; `m = f64::INFINITY` means no truncation.
pub fn marginal_density(measure: &RadialLevyMeasure, m: f64) -> Result<MarginalMeasure> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("truncation radius must be positive, got {m}")));
    }
    if let MeasureKind::TabulatedRadial { table } = measure.kind() {
        if m < table.radii()[0] {
            return Err(Error::Domain(format!(
                "tabulated grid starts at {} and does not cover the truncated range |v| <= {m}",
                table.radii()[0]
            )));
        }
    }
    Ok(MarginalMeasure {
        measure: measure.clone(),
        truncation: m,
        tol: DEFAULT_TOL,
    })
}

impl MarginalMeasure {
    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn measure(&self) -> &RadialLevyMeasure {
        &self.measure
    }

    /// Density of the projected measure at `y`.
    pub fn density(&self, y: f64) -> Result<f64> {
        let y = y.abs();
        let m = self.truncation;
        if y > m {
            return Ok(0.0);
        }
        let d = self.measure.dimension();
        if d == 1 {
            return Ok(self.measure.radial_density(y));
        }
        if y == 0.0 && self.measure.is_singular_at_origin() {
            return Ok(f64::INFINITY);
        }
        let rho_max = if m.is_infinite() {
            f64::INFINITY
        } else {
            (m * m - y * y).max(0.0).sqrt()
        };
        let rho_at = |b: f64| -> Option<f64> { (b > y).then(|| (b * b - y * y).sqrt()).filter(|p| *p < rho_max) };
        let mut pts = vec![0.0, rho_max];
        for b in self.measure.radial_breakpoints() {
            pts.extend(rho_at(b));
        }
        if y > 0.0 {
            pts.extend([y, 10.0 * y, 100.0 * y].into_iter().filter(|p| *p < rho_max));
        }
        let support = self.measure.support_radius();
        if let Some(p) = rho_at(support) {
            pts.retain(|x| *x <= p);
            pts.push(p);
        } else if support <= y {
            return Ok(0.0);
        }
        let power = d as f64 - 2.0;
        let integral = integrate_pieces(
            |rho: f64| {
                let q = self.measure.radial_density((y * y + rho * rho).sqrt());
                if q == 0.0 {
                    0.0
                } else {
                    q * rho.powf(power)
                }
            },
            &pts,
            self.tol,
        )?;
        Ok(unit_sphere_area(d - 1) * integral)
    }

    /// `int_0^{upper} y^2 nu_1(dy)` on the positive half-line.
    pub fn half_second_moment(&self, upper: f64) -> Result<f64> {
        if !(upper > 0.0) {
            return Ok(0.0);
        }
        let upper = upper.min(self.truncation);
        let mut pts = vec![0.0, upper];
        pts.extend(
            self.measure
                .radial_breakpoints()
                .into_iter()
                .filter(|b| *b > 0.0 && *b < upper),
        );
        if self.measure.dimension() == 1 {
            return integrate_pieces(|y: f64| y * y * self.measure.radial_density(y), &pts, self.tol);
        }
        let failure = RefCell::new(None);
        let value = integrate_pieces(
            |y: f64| match self.density(y) {
                Ok(v) => y * y * v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            &pts,
            self.tol,
        )?;
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

/// How a constant with a known closed form should be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluation {
    /// Closed form where one exists, quadrature otherwise.
    #[default]
    Auto,
    /// Always use quadrature.
    Quadrature,
}

/// `C_eps = 2 int_{-eps/4}^0 y^2 nu_1(dy)` for the untruncated marginal.
pub fn c_epsilon(measure: &RadialLevyMeasure, epsilon: f64) -> Result<f64> {
    c_epsilon_with(measure, epsilon, Evaluation::Auto)
}

pub fn c_epsilon_with(measure: &RadialLevyMeasure, epsilon: f64, how: Evaluation) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if !measure.has_mass_in_ball(epsilon / 2.0)? {
        return Err(Error::feasibility(
            4,
            format!("nu has no mass in the ball |v| <= eps/2 = {}", epsilon / 2.0),
        ));
    }
    let value = match (how, measure.kind(), measure.dimension()) {
        (Evaluation::Auto, MeasureKind::AlphaStable { alpha }, 1) => {
            2.0 / (2.0 - alpha) * (epsilon / 4.0).powf(2.0 - alpha)
        }
        _ => 2.0 * marginal_density(measure, f64::INFINITY)?.half_second_moment(epsilon / 4.0)?,
    };
    if !(value > 0.0) {
        return Err(Error::feasibility(
            4,
            format!("C_eps vanishes for eps = {epsilon}: the first marginal has no mass in [-eps/4, 0]"),
        ));
    }
    Ok(value)
}

/// Overlap `int_{|v|<=m, |v+x|<=m} q(v) ^ q(v+x) dv` for a displacement of length `s`.
pub fn overlap(measure: &RadialLevyMeasure, s: f64, m: f64) -> Result<f64> {
    overlap_with(measure, s, m, Evaluation::Auto)
}

pub fn overlap_with(measure: &RadialLevyMeasure, s: f64, m: f64, how: Evaluation) -> Result<f64> {
    if !(s > 0.0) || !(m > 0.0) {
        return Err(Error::Domain(format!(
            "overlap needs s > 0 and m > 0, got s={s}, m={m}"
        )));
    }
    if s >= 2.0 * m {
        return Ok(0.0);
    }
    if let (Evaluation::Auto, MeasureKind::AlphaStable { alpha }, 1) = (how, measure.kind(), measure.dimension()) {
        let tail = if m.is_infinite() { 0.0 } else { m.powf(-alpha) };
        return Ok(2.0 / alpha * ((s / 2.0).powf(-alpha) - tail));
    }
    if measure.dimension() == 1 {
        overlap_1d(measure, s, m)
    } else {
        overlap_nd(measure, s, m)
    }
}

fn overlap_1d(measure: &RadialLevyMeasure, s: f64, m: f64) -> Result<f64> {
    // Symmetric under v -> -s - v, so integrate over v >= -s/2 and double.
    let lo = -s / 2.0;
    let hi = m - s;
    let mut pts = vec![lo, hi, 0.0];
    for b in measure.radial_breakpoints() {
        pts.extend([b, -b, b - s, -b - s]);
    }
    pts.retain(|p| *p >= lo && *p <= hi);
    let half = integrate_pieces(
        |v: f64| measure.radial_density(v).min(measure.radial_density(v + s)),
        &pts,
        DEFAULT_TOL,
    )?;
    Ok(2.0 * half)
}

fn overlap_nd(measure: &RadialLevyMeasure, s: f64, m: f64) -> Result<f64> {
    let d = measure.dimension();
    let power = d as f64 - 2.0;
    let breaks = measure.radial_breakpoints();
    let support = measure.support_radius();
    let outer_hi = (m - s).min(support - s);
    let lo = -s / 2.0;
    if outer_hi <= lo {
        return Ok(0.0);
    }
    let inner_tol = Tolerance::new(DEFAULT_TOL.abs * 1e-2, DEFAULT_TOL.rel * 1e-1);
    let failure = RefCell::new(None);
    let inner = |v1: f64| -> f64 {
        let a2 = v1 * v1;
        let b2 = (v1 + s) * (v1 + s);
        // |v + x| >= |v| on this half, so the radius of v + x binds first
        let limit = m.min(support);
        let rho_max = if limit.is_infinite() {
            f64::INFINITY
        } else {
            (limit * limit - b2).max(0.0).sqrt()
        };
        if rho_max == 0.0 {
            return 0.0;
        }
        let mut pts = vec![0.0, rho_max];
        for &b in &breaks {
            for c2 in [a2, b2] {
                if b * b > c2 {
                    let p = (b * b - c2).sqrt();
                    if p < rho_max {
                        pts.push(p);
                    }
                }
            }
        }
        for scale in [a2.sqrt(), b2.sqrt()] {
            if scale > 0.0 && scale < rho_max {
                pts.push(scale);
            }
        }
        let f = |rho: f64| {
            let r2 = rho * rho;
            let q = measure
                .radial_density((a2 + r2).sqrt())
                .min(measure.radial_density((b2 + r2).sqrt()));
            if q == 0.0 {
                0.0
            } else {
                q * rho.powf(power)
            }
        };
        match integrate_pieces(f, &pts, inner_tol) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let mut pts = vec![lo, outer_hi, 0.0];
    for &b in &breaks {
        pts.extend([b, -b, b - s, -b - s]);
    }
    pts.retain(|p| *p >= lo && *p <= outer_hi);
    let half = integrate_pieces(inner, &pts, DEFAULT_TOL)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(2.0 * unit_sphere_area(d - 1) * half)
}

/// Displacement magnitudes at which the overlap infimum is evaluated.
pub fn overlap_magnitudes(measure: &RadialLevyMeasure, delta: f64, m: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..OVERLAP_GRID)
        .map(|k| delta * OVERLAP_GRID_FLOOR.powf(k as f64 / (OVERLAP_GRID - 1) as f64))
        .collect();
    grid.push(delta);
    // Kinks of the overlap as a function of |x| sit where shifted support
    // edges meet; add them so piecewise-linear minima are hit exactly.
    let mut edges = measure.radial_breakpoints();
    if m.is_finite() {
        edges.push(m);
    }
    for (i, &a) in edges.iter().enumerate() {
        grid.push(2.0 * a);
        for &b in &edges[i + 1..] {
            grid.push(a + b);
            grid.push((a - b).abs());
        }
    }
    grid.retain(|s| *s > 0.0 && *s <= delta);
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    grid.dedup();
    grid
}

/// `C_delta(m) = inf_{0 < |x| <= delta} overlap(|x|, m)`; `m = inf` gives the
/// untruncated constant. Returns 0 when the overlap vanishes somewhere.
pub fn c_delta_overlap(measure: &RadialLevyMeasure, delta: f64, m: f64) -> Result<f64> {
    c_delta_overlap_with(measure, delta, m, Evaluation::Auto)
}

pub fn c_delta_overlap_with(measure: &RadialLevyMeasure, delta: f64, m: f64, how: Evaluation) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    if how == Evaluation::Auto && measure.stable_alpha().is_some() && measure.dimension() == 1 {
        // decreasing in |x|
        return overlap_with(measure, delta, m, how);
    }
    let mut best = f64::INFINITY;
    for s in overlap_magnitudes(measure, delta, m) {
        best = best.min(overlap_with(measure, s, m, how)?);
        if best == 0.0 {
            break;
        }
    }
    Ok(best)
}

/// Truncation radius for the mirror coupling plus the small-jump cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams {
    /// Jumps larger than `m` are applied synchronously.
    pub m: f64,
    /// Jumps smaller than `eta` are not simulated.
    pub eta: f64,
}

impl TruncationParams {
    pub fn new(m: f64, eta: f64) -> Result<Self> {
        if !(m > 0.0 && eta > 0.0 && eta < m) {
            return Err(Error::Config(format!("need 0 < eta < m, got eta={eta}, m={m}")));
        }
        Ok(Self { m, eta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationOptions {
    /// Allowed residual small-jump variance as a fraction of `C_eps`.
    pub variance_budget: f64,
    pub max_doublings: u32,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        Self {
            variance_budget: DEFAULT_VARIANCE_BUDGET,
            max_doublings: M_SEARCH_DOUBLINGS,
        }
    }
}

/// Smallest doubling `m >= max(1, 2 delta)` for which the truncated
/// marginal keeps at least `C_eps / 2` of second moment on `[-eps/2, 0]`
/// and the truncated overlap keeps at least half of `C_delta`; `eta` is
/// then chosen from the variance budget.
pub fn select_truncation_m(
    measure: &RadialLevyMeasure,
    epsilon: f64,
    delta: f64,
    options: TruncationOptions,
) -> Result<TruncationParams> {
    let c_eps = c_epsilon(measure, epsilon)?;
    let c_delta = c_delta_overlap(measure, delta, f64::INFINITY)?;
    if !(c_delta > 0.0) {
        return Err(Error::feasibility(
            3,
            format!("the overlap of q with its translates vanishes for some 0 < |x| <= delta = {delta}"),
        ));
    }
    let m0 = 1f64.max(2.0 * delta);
    let mut failed = "";
    for k in 0..=options.max_doublings {
        let m = m0 * 2f64.powi(k as i32);
        let kept = marginal_density(measure, m)?.half_second_moment(epsilon / 2.0)?;
        if kept < 0.5 * c_eps {
            failed = "truncated second moment on [-eps/2, 0] below C_eps/2";
            continue;
        }
        let c_delta_m = c_delta_overlap(measure, delta, m)?;
        if c_delta_m < 0.5 * c_delta {
            failed = "truncated overlap below C_delta/2";
            continue;
        }
        let eta = select_eta(measure, m, options.variance_budget * c_eps)?;
        return TruncationParams::new(m, eta);
    }
    Err(Error::feasibility(
        3,
        format!(
            "no truncation radius up to {} satisfies the selection rules ({failed})",
            m0 * 2f64.powi(options.max_doublings as i32)
        ),
    ))
}

/// Largest cutoff below `m / 2` whose omitted variance stays within `budget`.
pub fn select_eta(measure: &RadialLevyMeasure, m: f64, budget: f64) -> Result<f64> {
    let cap = 0.5 * m;
    if !(budget > 0.0) {
        return Err(Error::Config(format!("variance budget must be positive, got {budget}")));
    }
    if let (MeasureKind::AlphaStable { alpha }, d) = (measure.kind(), measure.dimension()) {
        let eta = (budget * (2.0 - alpha) / unit_sphere_area(d)).powf(1.0 / (2.0 - alpha));
        return Ok(eta.min(cap));
    }
    if measure.residual_variance(cap)? <= budget {
        return Ok(cap);
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if measure.residual_variance(mid)? <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * cap {
            break;
        }
    }
    if lo == 0.0 {
        return Err(Error::Config(
            "no positive small-jump cutoff fits the variance budget".into(),
        ));
    }
    Ok(lo)
}

/// Coalescence probability `rho(v, z) = (q(v) ^ q(v+z) 1{|v+z| <= m}) / q(v)`;
/// 1 when `q(v) = 0` or `z = 0`.
pub fn rho(measure: &RadialLevyMeasure, v: &[f64], z: &[f64], m: f64) -> f64 {
    rho_with_cutoff(measure, v, z, m, 0.0)
}

/// `rho` for the measure restricted to `{|v| > eta}`, which is the measure
/// actually simulated.
pub fn rho_with_cutoff(measure: &RadialLevyMeasure, v: &[f64], z: &[f64], m: f64, eta: f64) -> f64 {
    if z.iter().all(|c| *c == 0.0) {
        return 1.0;
    }
    let rv = norm(v);
    let qv = if rv > eta { measure.radial_density(rv) } else { 0.0 };
    if qv == 0.0 {
        return 1.0;
    }
    let shifted = if v.len() == 1 {
        (v[0] + z[0]).abs()
    } else {
        v.iter().zip(z).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt()
    };
    if shifted > m || shifted <= eta {
        return 0.0;
    }
    if let MeasureKind::AlphaStable { alpha } = measure.kind {
        // q is radially decreasing; one power instead of two
        return if shifted <= rv {
            1.0
        } else {
            (rv / shifted).powf(measure.dimension as f64 + alpha)
        };
    }
    let qs = measure.radial_density(shifted);
    if qs >= qv {
        1.0
    } else {
        qs / qv
    }
}

#[derive(Debug, Clone)]
enum RadialSampler {
    /// Radial law with tail `(r / eta)^{-alpha}`.
    Pareto { eta: f64, inv_alpha: f64 },
    /// Piecewise-linear inverse of a tabulated radial CDF.
    Table { radii: Vec<f64>, cdf: Vec<f64> },
}

/// Compound-Poisson sampler for the jumps with `|v| > eta`.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    dimension: usize,
    eta: f64,
    rate: f64,
    radial: RadialSampler,
}

const TABLE_CELLS: usize = 4096;

impl JumpSampler {
    pub fn new(measure: &RadialLevyMeasure, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::Config(format!("small-jump cutoff must be positive, got {eta}")));
        }
        let rate = measure.tail_mass(eta)?;
        if !(rate.is_finite()) {
            return Err(Error::Config(format!("jump intensity above eta = {eta} is not finite")));
        }
        if !(rate > 0.0) {
            return Err(Error::Config(format!(
                "the measure has no jumps larger than eta = {eta}"
            )));
        }
        let radial = match measure.kind() {
            MeasureKind::AlphaStable { alpha } => RadialSampler::Pareto {
                eta,
                inv_alpha: 1.0 / alpha,
            },
            _ => Self::radial_table(measure, eta)?,
        };
        Ok(Self {
            dimension: measure.dimension(),
            eta,
            rate,
            radial,
        })
    }

    fn radial_table(measure: &RadialLevyMeasure, eta: f64) -> Result<RadialSampler> {
        let hi = measure.support_radius();
        let lo = eta.max(match measure.kind() {
            MeasureKind::ShellUniform { theta, beta } => theta / beta,
            MeasureKind::TabulatedRadial { table } => table.radii()[0],
            MeasureKind::AlphaStable { .. } => eta,
        });
        let mut radii: Vec<f64> = (0..=TABLE_CELLS)
            .map(|i| lo + (hi - lo) * i as f64 / TABLE_CELLS as f64)
            .collect();
        radii.extend(measure.radial_breakpoints().into_iter().filter(|b| *b > lo && *b < hi));
        radii.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        radii.dedup();
        let d = measure.dimension() as f64;
        let f = |r: f64| r.powf(d - 1.0) * measure.radial_density(r);
        let mut cdf = Vec::with_capacity(radii.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in radii.windows(2) {
            acc += tanh_sinh(f, w[0], w[1], DEFAULT_TOL)?;
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::Config("radial tail above eta has no mass".into()));
        }
        cdf.iter_mut().for_each(|c| *c /= acc);
        Ok(RadialSampler::Table { radii, cdf })
    }

    /// Poisson rate of the simulated jumps, `nu({|v| > eta})`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Radius for a uniform variate `u` in `[0, 1)`.
    pub fn radius_from_uniform(&self, u: f64) -> f64 {
        match &self.radial {
            RadialSampler::Pareto { eta, inv_alpha } => eta * (1.0 - u).powf(-inv_alpha),
            RadialSampler::Table { radii, cdf } => {
                let k = cdf.partition_point(|&c| c <= u).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[k - 1], cdf[k]);
                let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
                radii[k - 1] + t * (radii[k] - radii[k - 1])
            }
        }
    }

    /// CDF of the sampled radius.
    pub fn radius_cdf(&self, r: f64) -> f64 {
        match &self.radial {
            RadialSampler::Pareto { eta, inv_alpha } => {
                if r <= *eta {
                    0.0
                } else {
                    1.0 - (r / eta).powf(-1.0 / inv_alpha)
                }
            }
            RadialSampler::Table { radii, cdf } => {
                if r <= radii[0] {
                    return 0.0;
                }
                if r >= *radii.last().expect("non-empty") {
                    return 1.0;
                }
                let k = radii.partition_point(|&x| x <= r).clamp(1, radii.len() - 1);
                let t = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
                cdf[k - 1] + t * (cdf[k] - cdf[k - 1])
            }
        }
    }

    /// Waiting time until the next simulated jump.
    pub fn next_interarrival<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = Exp1.sample(rng);
        e / self.rate
    }

    /// Draws one jump into `out` and returns its length.
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> f64 {
        let r = self.radius_from_uniform(rng.random::<f64>());
        if self.dimension == 1 {
            out[0] = if rng.random::<bool>() { r } else { -r };
            return r;
        }
        loop {
            let mut sq = 0.0;
            for o in out.iter_mut() {
                let g: f64 = StandardNormal.sample(rng);
                *o = g;
                sq += g * g;
            }
            if sq > 0.0 {
                let scale = r / sq.sqrt();
                out.iter_mut().for_each(|o| *o *= scale);
                return r;
            }
        }
    }
}

/// Jump epochs and jump vectors of the compound-Poisson part on `[0, horizon]`.
pub fn sample_jumps<R: Rng + ?Sized>(
    measure: &RadialLevyMeasure,
    trunc: &TruncationParams,
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let sampler = JumpSampler::new(measure, trunc.eta)?;
    let mut jumps = Vec::new();
    if !(horizon > 0.0) {
        return Ok(jumps);
    }
    let mut t = sampler.next_interarrival(rng);
    while t <= horizon {
        let mut v = vec![0.0; measure.dimension()];
        sampler.sample_jump(rng, &mut v);
        jumps.push((t, v));
        t += sampler.next_interarrival(rng);
    }
    Ok(jumps)
}
