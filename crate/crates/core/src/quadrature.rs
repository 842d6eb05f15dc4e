//! One-dimensional quadrature used by the measure and distance-function code.
//!
//! Two independent rules live here: a double-exponential (tanh-sinh) rule,
//! which never evaluates the endpoints and therefore copes with integrable
//! endpoint singularities such as `|y|^{1-alpha}`, and a classic adaptive
//! Simpson rule for bounded, piecewise smooth integrands. Callers split the
//! range at every known kink or discontinuity; neither rule tries to find
//! them on its own.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Absolute and relative convergence targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn accepts(&self, err: f64, value: f64) -> bool {
        err <= self.abs.max(self.rel * value.abs())
    }
}

/// Targets used for every density integral in the crate.
pub const DEFAULT_TOL: Tolerance = Tolerance::new(1e-10, 1e-8);

const TS_MAX_LEVEL: usize = 12;
const TS_MIN_LEVEL: usize = 4;
const TS_T_MAX: f64 = 6.5;
const ENDPOINT_CUTOFF: f64 = 1e-100;

/// Tanh-sinh quadrature of `f` over the finite interval `[a, b]`.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("tanh_sinh needs finite limits, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return tanh_sinh(f, b, a, tol).map(|v| -v);
    }
    let half = 0.5 * (b - a);

    // Contribution of the abscissa pair at parameter t (t > 0) or the centre (t = 0).
    let node = |t: f64| -> Result<f64> {
        let u = FRAC_PI_2 * t.sinh();
        let cosh_u = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        if w == 0.0 || !w.is_finite() {
            return Ok(0.0);
        }
        // distance of the abscissa from the nearer endpoint, in units of `half`
        let d = 1.0 / (u.exp() * cosh_u);
        let mut acc = 0.0;
        let mut eval = |x: f64| -> Result<()> {
            if x <= a || x >= b {
                return Ok(());
            }
            let fx = f(x);
            if !fx.is_finite() {
                // Overflow (or 0 * inf) this close to an endpoint means an integrable
                // singularity whose remaining mass is far below tolerance.
                if d < ENDPOINT_CUTOFF {
                    return Ok(());
                }
                return Err(Error::Numerical(format!("integrand not finite at x = {x}")));
            }
            acc += w * fx;
            Ok(())
        };
        if t == 0.0 {
            eval(a + half)?;
        } else {
            eval(a + half * d)?;
            eval(b - half * d)?;
        }
        Ok(acc)
    };

    let mut h = 1.0;
    let mut sum = node(0.0)?;
    let mut k = 1usize;
    loop {
        let t = k as f64 * h;
        if t > TS_T_MAX {
            break;
        }
        sum += node(t)?;
        k += 1;
    }
    let mut estimate = half * h * sum;

    for level in 1..=TS_MAX_LEVEL {
        h *= 0.5;
        let mut k = 1usize;
        loop {
            let t = k as f64 * h;
            if t > TS_T_MAX {
                break;
            }
            sum += node(t)?;
            k += 2;
        }
        let next = half * h * sum;
        let err = (next - estimate).abs();
        estimate = next;
        if level >= TS_MIN_LEVEL && tol.accepts(err, estimate) {
            return Ok(estimate);
        }
    }
    log::warn!("tanh-sinh did not reach tolerance on [{a}, {b}]; returning best estimate");
    Ok(estimate)
}

/// Adaptive Simpson quadrature of a bounded integrand over `[a, b]`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "adaptive_simpson needs finite limits, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    if !(fa.is_finite() && fb.is_finite() && fm.is_finite()) {
        return Err(Error::Numerical(format!(
            "adaptive_simpson: integrand not finite on [{a}, {b}]"
        )));
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Scale the absolute target to the interval so deep recursion stays bounded.
    let target = tol.abs.max(tol.rel * whole.abs());
    simpson_step(&f, a, b, fa, fm, fb, whole, target, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, target: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(Error::Numerical(format!(
            "adaptive_simpson: integrand not finite near {m}"
        )));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * target {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * target, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * target, depth - 1)?)
}

/// Integral of `f` over `[a, inf)` with `a > 0`, via the substitution `x = 1/u`.
pub fn integrate_to_infinity<F>(f: F, a: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("integrate_to_infinity needs a > 0, got {a}")));
    }
    tanh_sinh(
        |u: f64| {
            let x = 1.0 / u;
            if x.is_infinite() {
                return 0.0;
            }
            let fx = f(x);
            if fx == 0.0 {
                0.0
            } else {
                fx * x * x
            }
        },
        0.0,
        1.0 / a,
        tol,
    )
}

/// Integral of `f` over the union of consecutive intervals given by
/// `points` (sorted, possibly starting at `-inf` and ending at `+inf`).
///
/// Each piece is handled by [`tanh_sinh`]; infinite tails are mapped to
/// finite ranges. Breakpoints should include every point where `f` is
/// not smooth.
pub fn integrate_pieces<F>(f: F, points: &[f64], tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut pts: Vec<f64> = points.iter().copied().filter(|p| !p.is_nan()).collect();
    pts.sort_by(|x, y| x.partial_cmp(y).expect("NaN filtered"));
    pts.dedup();
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += integrate_interval(&f, w[0], w[1], tol)?;
    }
    Ok(total)
}

fn integrate_interval(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => tanh_sinh(f, a, b, tol),
        (true, false) => {
            let start = a.max(1.0);
            let head = if a < start { tanh_sinh(f, a, start, tol)? } else { 0.0 };
            Ok(head + integrate_to_infinity(f, start, tol)?)
        }
        (false, true) => integrate_interval(&|x: f64| f(-x), -b, f64::INFINITY, tol),
        (false, false) => {
            Ok(integrate_interval(f, f64::NEG_INFINITY, 0.0, tol)? + integrate_interval(f, 0.0, f64::INFINITY, tol)?)
        }
    }
}

/// Cumulative trapezoid of `values` sampled with uniform spacing `step`.
pub fn cumulative_trapezoid(values: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    if let Some(&first) = values.first() {
        out.push(0.0);
        let mut prev = first;
        for &v in &values[1..] {
            acc += 0.5 * step * (prev + v);
            out.push(acc);
            prev = v;
        }
    }
    out
}

/// Pairwise summation; deterministic and order-insensitive up to the split.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}
