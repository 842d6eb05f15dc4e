//! The concave distance function `f = f1 + a 1_{(0,inf)}` and its
//! contraction constants.
//!
//! Everything is tabulated on a uniform grid whose spacing divides `eps`
//! exactly, so shifts by `eps` are index shifts. Integrals are cumulative
//! trapezoids; suprema over windows of length `eps` are sliding maxima over
//! closed node windows.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::drift::KappaProfile;
use crate::error::{Error, Result};
use crate::quadrature::cumulative_trapezoid;

/// Initial grid cells per `eps`.
pub const MIN_CELLS_PER_EPS: usize = 1000;
/// Refinement stops here even if the tables have not settled.
pub const MAX_CELLS_PER_EPS: usize = 128_000;
/// Relative change below which the tables count as converged.
pub const GRID_STABILITY: f64 = 1e-8;
/// Points used to check the functional inequality.
pub const INEQUALITY_POINTS: usize = 2000;
/// Allowed numerical violation of the functional inequality.
pub const INEQUALITY_SLACK: f64 = 1e-8;

/// Which normalization of `K` to use; they agree when `C_L = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KConvention {
    /// `K = (C_L delta + C f1(delta)/4) / (C f1(delta)/4)`.
    #[default]
    Proof,
    /// `K = (C_L delta + C f1(delta)/2) / (C f1(delta)/2)`.
    Statement,
}

/// Scalars that determine the distance function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceParams {
    pub epsilon: f64,
    pub delta: f64,
    pub m: f64,
    pub c_eps: f64,
    /// Untruncated overlap constant.
    pub c_delta: f64,
    /// Overlap constant with jumps truncated at `m`.
    pub c_delta_m: f64,
    pub r0: f64,
    pub r1: f64,
    pub c_l: f64,
    pub k_convention: KConvention,
}

/// Scalar outputs of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceConstants {
    pub epsilon: f64,
    pub delta: f64,
    pub m: f64,
    pub c_eps: f64,
    pub c_delta: f64,
    pub c_delta_m: f64,
    pub r0: f64,
    pub r1: f64,
    pub c_l: f64,
    pub c1: f64,
    pub k: f64,
    pub a: f64,
    pub c: f64,
    pub phi_r0: f64,
    pub f1_delta: f64,
    pub prefactor_tv: f64,
    pub prefactor_w1: f64,
    pub k_convention: KConvention,
    pub grid_step: f64,
}

/// Tabulated distance function with its constants.
#[derive(Debug, Clone)]
pub struct DistanceFunction {
    constants: DistanceConstants,
    cells_per_eps: usize,
    step: f64,
    h_bar: Vec<f64>,
    phi: Vec<f64>,
    big_phi: Vec<f64>,
    g: Vec<f64>,
    f1: Vec<f64>,
    f1_second: Vec<f64>,
}

/// One row of the tabulated distance function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceRow {
    pub r: f64,
    pub phi: f64,
    pub big_phi: f64,
    pub g: f64,
    pub f1: f64,
    pub f: f64,
}

/// Sliding maximum of `values` over the closed windows `[i, i + width]`.
fn forward_window_max(values: &[f64], width: usize, out_len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(out_len);
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..out_len {
        let end = (i + width).min(values.len() - 1);
        while next <= end {
            while deque.back().is_some_and(|&j| values[j] <= values[next]) {
                deque.pop_back();
            }
            deque.push_back(next);
            next += 1;
        }
        while deque.front().is_some_and(|&j| j < i) {
            deque.pop_front();
        }
        out.push(values[*deque.front().expect("window is non-empty")]);
    }
    out
}

/// Sliding maximum over the closed windows `[i - width, i]` (clipped at 0).
fn backward_window_max(values: &[f64], width: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut deque: VecDeque<usize> = VecDeque::new();
    for i in 0..values.len() {
        while deque.back().is_some_and(|&j| values[j] <= values[i]) {
            deque.pop_back();
        }
        deque.push_back(i);
        while deque.front().is_some_and(|&j| j + width < i) {
            deque.pop_front();
        }
        out.push(values[*deque.front().expect("window is non-empty")]);
    }
    out
}

/// `h_bar(r) = sup_{t in (r, r+eps)} t kappa^-(t)` at the nodes `i * step`,
/// `i < len`, with `eps = cells_per_eps * step`.
pub fn build_h_bar(kappa: &KappaProfile, cells_per_eps: usize, step: f64, len: usize) -> Vec<f64> {
    let samples: Vec<f64> = (0..len + cells_per_eps)
        .map(|j| {
            let t = j as f64 * step;
            t * kappa.negative_part(t)
        })
        .collect();
    forward_window_max(&samples, cells_per_eps, len)
}

/// `phi = exp(-int_0^r h_bar / C_eps)` and `Phi = int_0^r phi`.
pub fn build_phi_big_phi(h_bar: &[f64], c_eps: f64, step: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(c_eps > 0.0) {
        return Err(Error::Domain(format!("C_eps must be positive, got {c_eps}")));
    }
    let scaled: Vec<f64> = h_bar.iter().map(|h| h / c_eps).collect();
    let exponent = cumulative_trapezoid(&scaled, step);
    if let Some(worst) = exponent.last().filter(|e| **e > 700.0) {
        return Err(Error::Numerical(format!(
            "int h_bar / C_eps reaches {worst:.1}; kappa is too negative for phi to be represented"
        )));
    }
    let phi: Vec<f64> = exponent.iter().map(|e| (-e).exp()).collect();
    let big_phi = cumulative_trapezoid(&phi, step);
    Ok((phi, big_phi))
}

/// Output of [`build_g_f1_c1`].
#[derive(Debug, Clone)]
pub struct ProfileTables {
    pub g: Vec<f64>,
    pub f1: Vec<f64>,
    pub c1: f64,
    /// `int_0^{R1} Phi(t + eps) / phi(t) dt`.
    pub j_r1: f64,
    /// `Phi(t + eps) / phi(t)` at the nodes.
    pub ratio: Vec<f64>,
}

/// `g`, `f1 = int phi g` and `c1 = C_eps / (2 int_0^{R1} Phi(t+eps)/phi(t) dt)`.
///
/// `phi` and `big_phi` must extend `cells_per_eps` nodes past `r1`.
pub fn build_g_f1_c1(
    phi: &[f64],
    big_phi: &[f64],
    cells_per_eps: usize,
    step: f64,
    r1: f64,
    c_eps: f64,
) -> Result<ProfileTables> {
    let n = phi.len();
    let k = (r1 / step).floor() as usize;
    if k + 1 + cells_per_eps >= n {
        return Err(Error::Domain(format!("tables end before R1 + eps (R1 = {r1})")));
    }
    let len = n - cells_per_eps;
    let ratio: Vec<f64> = (0..len).map(|i| big_phi[i + cells_per_eps] / phi[i]).collect();
    let mut j = cumulative_trapezoid(&ratio, step);
    let frac = r1 - k as f64 * step;
    let at_r1 = ratio[k] + (ratio[k + 1] - ratio[k]) * frac / step;
    let j_r1 = j[k] + 0.5 * frac * (ratio[k] + at_r1);
    j.iter_mut().skip(k + 1).for_each(|v| *v = j_r1);
    let g: Vec<f64> = j.iter().map(|v| 1.0 - 0.5 * v / j_r1).collect();
    let integrand: Vec<f64> = phi[..len].iter().zip(&g).map(|(p, g)| p * g).collect();
    let f1 = cumulative_trapezoid(&integrand, step);
    Ok(ProfileTables {
        g,
        f1,
        c1: c_eps / (2.0 * j_r1),
        j_r1,
        ratio,
    })
}

/// `(K, a, c)` from `f1(delta)`, the overlap constant, `C_L` and `c1`.
pub fn assemble_constants(
    f1_delta: f64,
    delta: f64,
    c_delta: f64,
    c_l: f64,
    c1: f64,
    convention: KConvention,
) -> Result<(f64, f64, f64)> {
    if !(c_delta > 0.0) {
        return Err(Error::feasibility(3, "the overlap constant C_delta vanishes"));
    }
    if !(f1_delta > 0.0) {
        return Err(Error::Domain(format!("f1(delta) must be positive, got {f1_delta}")));
    }
    let base = match convention {
        KConvention::Proof => c_delta * f1_delta / 4.0,
        KConvention::Statement => c_delta * f1_delta / 2.0,
    };
    let k = (c_l * delta + base) / base;
    let a = k * f1_delta;
    let c = (c1 / (2.0 * k)).min(c_delta / 4.0);
    Ok((k, a, c))
}

fn interp(table: &[f64], step: f64, r: f64) -> f64 {
    let x = r / step;
    let i = x.floor() as usize;
    if i + 1 >= table.len() {
        return table[table.len() - 1];
    }
    let t = x - i as f64;
    table[i] + t * (table[i + 1] - table[i])
}

impl DistanceFunction {
    /// Builds the tables at a fixed resolution of `cells_per_eps` cells per `eps`.
    pub fn build_at(params: &DistanceParams, kappa: &KappaProfile, cells_per_eps: usize) -> Result<Self> {
        let p = params;
        if !(p.epsilon > 0.0 && p.delta >= p.epsilon) {
            return Err(Error::Domain(format!(
                "need 0 < eps <= delta, got eps={}, delta={}",
                p.epsilon, p.delta
            )));
        }
        if !(p.r1 >= p.r0 + p.epsilon - 1e-12) {
            return Err(Error::Domain(format!("R1 = {} is below R0 + eps", p.r1)));
        }
        let step = p.epsilon / cells_per_eps as f64;
        // tables cover [0, R1 + 2 eps]; phi and Phi one more eps for the shift
        let len = ((p.r1 + 2.0 * p.epsilon) / step).ceil() as usize + 1;
        let h_bar = build_h_bar(kappa, cells_per_eps, step, len + cells_per_eps);
        let (phi, big_phi) = build_phi_big_phi(&h_bar, p.c_eps, step)?;
        let tables = build_g_f1_c1(&phi, &big_phi, cells_per_eps, step, p.r1, p.c_eps)?;
        let mut phi = phi;
        let mut big_phi = big_phi;
        let mut h_bar = h_bar;
        phi.truncate(len);
        big_phi.truncate(len);
        h_bar.truncate(len);

        let f1_second: Vec<f64> = (0..len)
            .map(|i| {
                let r = i as f64 * step;
                let own = -(h_bar[i] / p.c_eps) * phi[i] * tables.g[i];
                if r < p.r1 {
                    own - 0.5 * phi[i] * tables.ratio[i] / tables.j_r1
                } else {
                    own
                }
            })
            .collect();

        let phi_r0 = interp(&phi, step, p.r0);
        let f1_delta = interp(&tables.f1, step, p.delta);
        let (k, a, c) = assemble_constants(f1_delta, p.delta, p.c_delta, p.c_l, tables.c1, p.k_convention)?;
        let constants = DistanceConstants {
            epsilon: p.epsilon,
            delta: p.delta,
            m: p.m,
            c_eps: p.c_eps,
            c_delta: p.c_delta,
            c_delta_m: p.c_delta_m,
            r0: p.r0,
            r1: p.r1,
            c_l: p.c_l,
            c1: tables.c1,
            k,
            a,
            c,
            phi_r0,
            f1_delta,
            prefactor_tv: 2.0 / a,
            prefactor_w1: 2.0 / phi_r0,
            k_convention: p.k_convention,
            grid_step: step,
        };
        Ok(Self {
            constants,
            cells_per_eps,
            step,
            h_bar,
            phi,
            big_phi,
            g: tables.g[..len].to_vec(),
            f1: tables.f1[..len].to_vec(),
            f1_second,
        })
    }

    /// Builds the tables, doubling the resolution until `phi(R0)`, `Phi` at
    /// the end of the table and `c1` settle.
    pub fn build(params: &DistanceParams, kappa: &KappaProfile) -> Result<Self> {
        let mut cells = MIN_CELLS_PER_EPS;
        let mut current = Self::build_at(params, kappa, cells)?;
        loop {
            if cells * 2 > MAX_CELLS_PER_EPS {
                log::warn!("distance tables did not settle to {GRID_STABILITY:e}; using {cells} cells per eps");
                return Ok(current);
            }
            cells *= 2;
            let finer = Self::build_at(params, kappa, cells)?;
            let end = (params.r1 + params.epsilon).min((current.phi.len() - 1) as f64 * current.step);
            let settled = rel_change(current.constants.phi_r0, finer.constants.phi_r0) < GRID_STABILITY
                && rel_change(current.big_phi(end), finer.big_phi(end)) < GRID_STABILITY
                && rel_change(current.constants.c1, finer.constants.c1) < GRID_STABILITY;
            current = finer;
            if settled {
                return Ok(current);
            }
        }
    }

    pub fn constants(&self) -> &DistanceConstants {
        &self.constants
    }

    pub fn cells_per_eps(&self) -> usize {
        self.cells_per_eps
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Last radius covered by the tables.
    pub fn table_end(&self) -> f64 {
        (self.f1.len() - 1) as f64 * self.step
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    pub fn phi(&self, r: f64) -> f64 {
        interp(&self.phi, self.step, r)
    }

    pub fn big_phi(&self, r: f64) -> f64 {
        let end = self.table_end();
        if r > end {
            return self.big_phi[self.big_phi.len() - 1] + self.phi[self.phi.len() - 1] * (r - end);
        }
        interp(&self.big_phi, self.step, r)
    }

    pub fn g(&self, r: f64) -> f64 {
        interp(&self.g, self.step, r)
    }

    pub fn h_bar(&self, r: f64) -> f64 {
        interp(&self.h_bar, self.step, r)
    }

    /// `f1`, affine beyond the table with slope `phi(R0)/2`.
    pub fn f1(&self, r: f64) -> f64 {
        let end = self.table_end();
        if r > end {
            return self.f1[self.f1.len() - 1] + 0.5 * self.constants.phi_r0 * (r - end);
        }
        interp(&self.f1, self.step, r)
    }

    pub fn f1_prime(&self, r: f64) -> f64 {
        if r > self.table_end() {
            return 0.5 * self.constants.phi_r0;
        }
        self.phi(r) * self.g(r)
    }

    /// `f(r) = f1(r) + a` for `r > 0`, `f(0) = 0`.
    pub fn f_eval(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::Domain(format!("distance argument must be nonnegative, got {r}")));
        }
        Ok(self.f(r))
    }

    /// [`Self::f_eval`] for arguments known to be nonnegative.
    #[inline]
    pub fn f(&self, r: f64) -> f64 {
        if r == 0.0 {
            0.0
        } else {
            self.f1(r) + self.constants.a
        }
    }

    /// Tabulated one-sided second derivative of `f1` at the nodes.
    pub fn f1_second_table(&self) -> &[f64] {
        &self.f1_second
    }

    pub fn f1_table(&self) -> &[f64] {
        &self.f1
    }

    /// `sup_{x in (y - eps, y)} f1''(x)` at every node.
    pub fn f_bar_table(&self) -> Vec<f64> {
        backward_window_max(&self.f1_second, self.cells_per_eps)
    }

    /// Rows `(r, phi, Phi, g, f1, f)` every `stride` nodes.
    pub fn rows(&self, stride: usize) -> Vec<DistanceRow> {
        (0..self.len())
            .step_by(stride.max(1))
            .map(|i| DistanceRow {
                r: self.node(i),
                phi: self.phi[i],
                big_phi: self.big_phi[i],
                g: self.g[i],
                f1: self.f1[i],
                f: if i == 0 { 0.0 } else { self.f1[i] + self.constants.a },
            })
            .collect()
    }
}

fn rel_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Result of checking `-f1'(r) kappa(r) r + C_eps f_bar(r) <= -c1 f1(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub points: usize,
    pub lower: f64,
    pub upper: f64,
    /// Largest value of `lhs + c1 f1(r)`.
    pub max_violation: f64,
    pub argmax: f64,
    pub passed: bool,
}

/// Checks the functional inequality on `INEQUALITY_POINTS` points in
/// `(delta, r_max]`, snapped to table nodes inside the table.
pub fn verify_functional_inequality(
    df: &DistanceFunction,
    kappa: &KappaProfile,
    r_max: f64,
) -> Result<InequalityReport> {
    let k = df.constants();
    if !(r_max > k.delta) {
        return Err(Error::Domain(format!(
            "r_max = {r_max} must exceed delta = {}",
            k.delta
        )));
    }
    let f_bar = df.f_bar_table();
    let last = df.len() - 1;
    let mut worst = f64::NEG_INFINITY;
    let mut argmax = k.delta;
    for j in 1..=INEQUALITY_POINTS {
        let target = k.delta + (r_max - k.delta) * j as f64 / INEQUALITY_POINTS as f64;
        let idx = (target / df.step()).round() as usize;
        let (r, f1, f1p, fbar) = if idx <= last {
            let r = df.node(idx);
            (r, df.f1[idx], df.phi[idx] * df.g[idx], f_bar[idx])
        } else {
            (target, df.f1(target), 0.5 * k.phi_r0, 0.0)
        };
        if r <= k.delta {
            continue;
        }
        let lhs = -f1p * kappa.eval(r) * r + k.c_eps * fbar;
        let violation = lhs + k.c1 * f1;
        if violation > worst {
            worst = violation;
            argmax = r;
        }
    }
    Ok(InequalityReport {
        points: INEQUALITY_POINTS,
        lower: k.delta,
        upper: r_max,
        max_violation: worst,
        argmax,
        passed: worst <= INEQUALITY_SLACK,
    })
}
