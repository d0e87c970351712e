//! Unstable-leaf rectangles and horocycle shadowing.
//!
//! For `y = x u_-(r) g(t)` the positive horocycle through `y` crosses the
//! leaf through `x u_+(s)` at time `alpha(r, t, s) = s / (e^t (1 - r s))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psl2::{flow, phi_inv, FlowKind, TangentPoint, UnimodularMatrix};
use crate::quotient::{quotient_dist, reduce, FuchsianGroupSpec};

/// Smallest admissible value of `1 - r s`.
pub const DENOMINATOR_FLOOR: f64 = 1e-9;

/// `S_x(a, b) = { x u_-(r) g(s) : |r| <= a, |s| <= b }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangleSpec {
    pub base: TangentPoint,
    pub a: f64,
    pub b: f64,
}

impl RectangleSpec {
    pub fn new(base: TangentPoint, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rectangle half-sizes must be positive (a = {a}, b = {b})"
            )));
        }
        Ok(RectangleSpec { base, a, b })
    }

    /// The point `x u_-(r) g(s)`.
    pub fn point(&self, r: f64, s: f64) -> TangentPoint {
        flow(
            &flow(&self.base, FlowKind::HorocycleNeg, r),
            FlowKind::Geodesic,
            s,
        )
    }
}

/// The box swept by flowing a rectangle along positive horocycles for time
/// up to `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub rectangle: RectangleSpec,
    pub c: f64,
}

impl BoxSpec {
    pub fn new(rectangle: RectangleSpec, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box extent c = {c} must be positive"
            )));
        }
        Ok(BoxSpec { rectangle, c })
    }

    /// The point `x u_-(r) g(s) u_+(h)`.
    pub fn point(&self, r: f64, s: f64, h: f64) -> TangentPoint {
        flow(&self.rectangle.point(r, s), FlowKind::HorocyclePos, h)
    }
}

fn denominator(r: f64, s: f64) -> Result<f64> {
    let den = 1.0 - r * s;
    if den <= DENOMINATOR_FLOOR {
        Err(Error::DenominatorVanishes(den))
    } else {
        Ok(den)
    }
}

/// Crossing time `s / (e^t (1 - r s))`.
pub fn alpha(r: f64, t: f64, s: f64) -> Result<f64> {
    let den = denominator(r, s)?;
    Ok(s / (t.exp() * den))
}

/// `d alpha / ds = 1 / (e^t (1 - r s)^2)`.
pub fn alpha_prime(r: f64, t: f64, s: f64) -> Result<f64> {
    let den = denominator(r, s)?;
    Ok(1.0 / (t.exp() * den * den))
}

/// Solution of `U_-(r) G(t) U_+(alpha) = U_+(s) U_-(rho) G(tau)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutationSolution {
    pub alpha: f64,
    pub rho: f64,
    pub tau: f64,
    /// Max entrywise residual of the matrix equation.
    pub residual: f64,
}

fn commutation_residual(r: f64, t: f64, s: f64, x: [f64; 3]) -> [f64; 4] {
    let [al, rho, tau] = x;
    let lhs = UnimodularMatrix::horocycle_neg(r)
        .compose(&UnimodularMatrix::geodesic(t))
        .entries();
    // (U_-(r) G(t)) U_+(alpha), multiplied out without renormalization
    let l = [lhs[0], lhs[0] * al + lhs[1], lhs[2], lhs[2] * al + lhs[3]];
    let (e, f) = ((0.5 * tau).exp(), (-0.5 * tau).exp());
    let rhs = [(1.0 + s * rho) * e, s * f, rho * e, f];
    [l[0] - rhs[0], l[1] - rhs[1], l[2] - rhs[2], l[3] - rhs[3]]
}

fn solve3(m: [[f64; 3]; 3], v: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut mk = m;
        for row in 0..3 {
            mk[row][k] = v[row];
        }
        *slot = det(mk) / d;
    }
    Some(out)
}

fn newton(r: f64, t: f64, s: f64, mut x: [f64; 3]) -> [f64; 3] {
    // the Newton step is a descent direction for this merit
    let merit = |f: [f64; 4]| f[1] * f[1] + f[2] * f[2] + f[3] * f[3];
    let lhs = UnimodularMatrix::horocycle_neg(r)
        .compose(&UnimodularMatrix::geodesic(t))
        .entries();
    let mut cur = merit(commutation_residual(r, t, s, x));
    for _ in 0..200 {
        if !(cur >= 1e-30) {
            break;
        }
        let f = commutation_residual(r, t, s, x);
        let (e, g) = ((0.5 * x[2]).exp(), (-0.5 * x[2]).exp());
        // Jacobian of entries (0,1), (1,0), (1,1) with respect to (alpha, rho, tau)
        let jac = [
            [lhs[0], 0.0, 0.5 * s * g],
            [0.0, -e, -0.5 * x[1] * e],
            [lhs[2], 0.0, 0.5 * g],
        ];
        let Some(step) = solve3(jac, [-f[1], -f[2], -f[3]]) else {
            break;
        };
        let mut lambda = 1.0;
        loop {
            let trial = [
                x[0] + lambda * step[0],
                x[1] + lambda * step[1],
                x[2] + lambda * step[2],
            ];
            let tr = merit(commutation_residual(r, t, s, trial));
            if tr.is_finite() && (tr < cur || lambda < 1e-6) {
                x = trial;
                cur = tr;
                break;
            }
            lambda *= 0.5;
        }
    }
    x
}

/// Solves the commutation equation by damped Newton iteration on
/// `(alpha, rho, tau)` starting from `(s, r, t)`.
///
/// The three equations are the `(0,1)`, `(1,0)` and `(1,1)` entries; the
/// `(0,0)` entry then follows from the determinant and is included in the
/// reported residual. When the direct start fails, `r` is raised from `0`
/// (where the root is `(s, 0, t)`) in steps, each warm-started from the
/// last.
pub fn solve_commutation(r: f64, t: f64, s: f64) -> Result<CommutationSolution> {
    if 1.0 - r * s <= DENOMINATOR_FLOOR {
        return Err(Error::NoSolution(format!(
            "1 - r s = {} is not positive",
            1.0 - r * s
        )));
    }
    let norm = |x: [f64; 3]| {
        commutation_residual(r, t, s, x)
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    };
    let mut x = newton(r, t, s, [s, r, t]);
    let mut res = norm(x);
    let mut pieces = 4;
    while !(res < 1e-10) && pieces <= 4096 {
        let mut y = [s, 0.0, t];
        for k in 1..=pieces {
            y = newton(r * k as f64 / pieces as f64, t, s, y);
        }
        x = y;
        res = norm(x);
        pieces *= 4;
    }
    if !(res < 1e-10) {
        return Err(Error::NoSolution(format!(
            "Newton stalled at residual {res:e}"
        )));
    }
    Ok(CommutationSolution {
        alpha: x[0],
        rho: x[1],
        tau: x[2],
        residual: res,
    })
}

/// Flows `n_samples` points of `spec` by `g(s)` and re-expresses each in
/// the rectangle coordinates of `spec.base g(s)`. Returns the largest
/// deviation of `(r', s')` from `(e^s r, s_orig)`.
pub fn rectangle_scaling_check(spec: &RectangleSpec, s: f64, n_samples: usize) -> f64 {
    let base = phi_inv(&spec.base);
    let moved_base = base.compose(&UnimodularMatrix::geodesic(s));
    let moved_inv = moved_base.inverse();
    // Deterministic Kronecker sequence covering the rectangle.
    let (g1, g2) = (0.754_877_666_246_692_7_f64, 0.569_840_290_998_053_2_f64);
    let mut worst: f64 = 0.0;
    for i in 0..n_samples {
        let (u, v) = if n_samples == 1 {
            (1.0, 1.0)
        } else {
            (
                2.0 * ((0.5 + g1 * i as f64).fract()) - 1.0,
                2.0 * ((0.5 + g2 * i as f64).fract()) - 1.0,
            )
        };
        let (r0, s0) = (u * spec.a, v * spec.b);
        let point = base
            .compose(&UnimodularMatrix::horocycle_neg(r0))
            .compose(&UnimodularMatrix::geodesic(s0))
            .compose(&UnimodularMatrix::geodesic(s));
        // Should equal [[e^{s'/2}, 0], [r' e^{s'/2}, e^{-s'/2}]].
        let [a, _, c, _] = moved_inv.compose(&point).entries();
        let (a, c) = if a < 0.0 { (-a, -c) } else { (a, c) };
        let r1 = c / a;
        let s1 = 2.0 * a.ln();
        worst = worst.max((r1 - s.exp() * r0).abs()).max((s1 - s0).abs());
    }
    worst
}

/// Corner-point version of [`rectangle_scaling_check`]: the `r'` coordinate
/// of `x u_-(a) g(b) g(s)` relative to `x g(s)`.
pub fn scaled_corner(spec: &RectangleSpec, s: f64) -> f64 {
    let base = phi_inv(&spec.base);
    let moved_inv = base.compose(&UnimodularMatrix::geodesic(s)).inverse();
    let point = base
        .compose(&UnimodularMatrix::horocycle_neg(spec.a))
        .compose(&UnimodularMatrix::geodesic(spec.b + s));
    let [a, _, c, _] = moved_inv.compose(&point).entries();
    c / a
}

/// Maximum over `n_samples` equally spaced `s` in `[0, t]` of the quotient
/// distance between `x u_+(s)` and `y u_+(alpha(r, u, s))`, where
/// `y = x u_-(r) g(u)`.
#[allow(clippy::too_many_arguments)]
pub fn shadowing_sup_distance(
    x: &TangentPoint,
    delta: f64,
    t: f64,
    r: f64,
    u: f64,
    n_samples: usize,
    group: FuchsianGroupSpec,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "delta = {delta} outside (0, 1/2)"
        )));
    }
    if !(t > 0.0) || r.abs() > delta / t * (1.0 + 1e-12) || u.abs() > delta * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "need t > 0, |r| <= delta/t, |u| <= delta (t = {t}, r = {r}, u = {u})"
        )));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let y = flow(&flow(x, FlowKind::HorocycleNeg, r), FlowKind::Geodesic, u);
    let mut worst: f64 = 0.0;
    for k in 0..n_samples {
        let s = t * k as f64 / (n_samples - 1) as f64;
        let lead = reduce(&flow(x, FlowKind::HorocyclePos, s), group)?;
        let follow = reduce(&flow(&y, FlowKind::HorocyclePos, alpha(r, u, s)?), group)?;
        worst = worst.max(quotient_dist(&lead, &follow, group));
    }
    Ok(worst)
}

/// Hyperbolic length of the curve `s -> x u_+(s) g(t)`, `s in [0, len]`,
/// by composite Simpson quadrature of `|z'(s)| / Im z(s)`.
pub fn pushed_horocycle_length(x: &TangentPoint, t: f64, len: f64, n_panels: usize) -> f64 {
    let base = phi_inv(x);
    let g = UnimodularMatrix::geodesic(t);
    let at = |s: f64| {
        crate::psl2::phi(
            &base
                .compose(&UnimodularMatrix::horocycle_pos(s))
                .compose(&g),
        )
        .z()
    };
    let h = 1e-5 * len.max(1e-3);
    let speed = |s: f64| {
        let dz = (at(s + h) - at(s - h)) / (2.0 * h);
        dz.norm() / at(s).im
    };
    let n = n_panels.max(1) * 2;
    let step = len / n as f64;
    let mut acc = speed(0.0) + speed(len);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * speed(i as f64 * step);
    }
    acc * step / 3.0
}
