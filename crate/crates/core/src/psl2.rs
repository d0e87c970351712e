//! PSL(2,R), its derivative action on the unit tangent bundle of the upper
//! half-plane, and the geodesic / horocycle flows as right multiplication.
//!
//! A unit tangent vector at `z = x + iy` is stored by its direction angle
//! `theta`: the vector itself is `y * e^{i theta}`, so `theta = pi/2` points
//! straight up. The base point of the identification `PSL(2,R) -> T^1 H` is
//! `(i, pi/2)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduce an angle into `[0, 2*pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Absolute angular difference reduced to `[0, pi]`.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// An element of PSL(2,R): a real 2x2 matrix of determinant one, modulo sign.
///
/// The stored representative is renormalized to determinant one and has its
/// first nonzero entry (scanning a, b, c, d) positive, so `M` and `-M`
/// compare equal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnimodularMatrix {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl UnimodularMatrix {
    pub const IDENTITY: UnimodularMatrix = UnimodularMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds the class of `[[a, b], [c, d]]`, dividing by `sqrt(ad - bc)`.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "matrix [[{a}, {b}], [{c}, {d}]] has non-positive determinant {det}"
            )));
        }
        Ok(Self::normalized(a, b, c, d))
    }

    fn normalized(a: f64, b: f64, c: f64, d: f64) -> Self {
        let det = a * d - b * c;
        let s = if (det - 1.0).abs() > 1e-15 {
            det.sqrt().recip()
        } else {
            1.0
        };
        let (mut a, mut b, mut c, mut d) = (a * s, b * s, c * s, d * s);
        let lead = [a, b, c, d].into_iter().find(|v| *v != 0.0).unwrap_or(1.0);
        if lead < 0.0 {
            a = -a;
            b = -b;
            c = -c;
            d = -d;
        }
        UnimodularMatrix { a, b, c, d }
    }

    /// Geodesic flow generator `diag(e^{t/2}, e^{-t/2})`.
    pub fn geodesic(t: f64) -> Self {
        let h = (0.5 * t).exp();
        UnimodularMatrix {
            a: h,
            b: 0.0,
            c: 0.0,
            d: h.recip(),
        }
    }

    /// Positive horocycle generator `[[1, t], [0, 1]]`.
    pub fn horocycle_pos(t: f64) -> Self {
        Self::normalized(1.0, t, 0.0, 1.0)
    }

    /// Negative horocycle generator `[[1, 0], [t, 1]]`.
    pub fn horocycle_neg(t: f64) -> Self {
        Self::normalized(1.0, 0.0, t, 1.0)
    }

    /// Rotation about `i`, turning tangent directions at `i` by `2*phi`.
    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self::normalized(c, s, -s, c)
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Largest absolute entry.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::normalized(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
    }

    pub fn inverse(&self) -> Self {
        Self::normalized(self.d, -self.b, -self.c, self.a)
    }

    /// `cz + d`, the automorphy factor at `z`.
    fn factor(&self, z: Complex64) -> Complex64 {
        z * self.c + self.d
    }

    /// Möbius action `(az + b) / (cz + d)` on the upper half-plane.
    pub fn moebius_apply(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im > 0.0) {
            return Err(Error::NotInUpperHalfPlane(z.im));
        }
        Ok(self.moebius_unchecked(z))
    }

    pub(crate) fn moebius_unchecked(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / self.factor(z)
    }

    /// Derivative action on unit tangent vectors: the base point moves by
    /// the Möbius map and the direction turns by `-2 arg(cz + d)`.
    pub fn tangent_apply(&self, p: &TangentPoint) -> TangentPoint {
        let z = p.z();
        let den = self.factor(z);
        let w = (z * self.a + self.b) / den;
        // Im w = y / |cz+d|^2, computed directly to keep it positive.
        let y = p.y / den.norm_sqr();
        TangentPoint::from_raw(w.re, y, p.theta - 2.0 * den.arg())
    }

    /// Approximate equality of classes (entrywise, up to sign).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let e = self.entries();
        let f = other.entries();
        let same = e.iter().zip(f.iter()).all(|(x, y)| (x - y).abs() <= tol);
        let flipped = e.iter().zip(f.iter()).all(|(x, y)| (x + y).abs() <= tol);
        same || flipped
    }
}

impl Default for UnimodularMatrix {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Mul for UnimodularMatrix {
    type Output = UnimodularMatrix;

    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

impl fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// A point `(z, theta)` of the unit tangent bundle of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentPoint {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl TangentPoint {
    pub fn new(x: f64, y: f64, theta: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() || !theta.is_finite() {
            return Err(Error::NotInUpperHalfPlane(y));
        }
        Ok(Self::from_raw(x, y, theta))
    }

    pub(crate) fn from_raw(x: f64, y: f64, theta: f64) -> Self {
        TangentPoint {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    /// The base point of the identification, `(i, pi/2)`.
    pub fn base() -> Self {
        TangentPoint {
            x: 0.0,
            y: 1.0,
            theta: FRAC_PI_2,
        }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// Coordinatewise closeness, comparing angles modulo `2*pi`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && angle_gap(self.theta, other.theta) <= tol
    }
}

/// The three flows on the unit tangent bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlowKind {
    Geodesic,
    HorocyclePos,
    HorocycleNeg,
}

impl FlowKind {
    pub const ALL: [FlowKind; 3] = [
        FlowKind::Geodesic,
        FlowKind::HorocyclePos,
        FlowKind::HorocycleNeg,
    ];

    pub fn matrix(self, t: f64) -> UnimodularMatrix {
        match self {
            FlowKind::Geodesic => UnimodularMatrix::geodesic(t),
            FlowKind::HorocyclePos => UnimodularMatrix::horocycle_pos(t),
            FlowKind::HorocycleNeg => UnimodularMatrix::horocycle_neg(t),
        }
    }
}

/// `A -> A . (i, pi/2)`.
pub fn phi(m: &UnimodularMatrix) -> TangentPoint {
    m.tangent_apply(&TangentPoint::base())
}

/// Inverse of [`phi`]: the matrix `N A K(phi)` carrying `(i, pi/2)` to `p`.
pub fn phi_inv(p: &TangentPoint) -> UnimodularMatrix {
    let sy = p.y.sqrt();
    let (s, c) = (0.5 * (p.theta - FRAC_PI_2)).sin_cos();
    let u = p.x / sy;
    UnimodularMatrix::normalized(sy * c - u * s, sy * s + u * c, -s / sy, c / sy)
}

/// Runs `kind` for time `t` starting at `p` (right multiplication).
pub fn flow(p: &TangentPoint, kind: FlowKind, t: f64) -> TangentPoint {
    phi(&phi_inv(p).compose(&kind.matrix(t)))
}

/// Hyperbolic distance between two points of the upper half-plane.
pub fn hyperbolic_distance(z: Complex64, w: Complex64) -> f64 {
    let s = (z - w).norm() / (2.0 * (z.im * w.im).sqrt());
    2.0 * s.asinh()
}

/// Product-metric proxy `sqrt(d_hyp^2 + dtheta^2)` on the unit tangent bundle.
///
/// `dtheta` compares the two directions after parallel transport along the
/// geodesic joining the base points, which makes the proxy invariant under
/// the left action.
pub fn dist(p: &TangentPoint, q: &TangentPoint) -> f64 {
    let d = hyperbolic_distance(p.z(), q.z());
    let dtheta = if d < 1e-12 {
        angle_gap(p.theta, q.theta)
    } else {
        // Move p to (i, pi/2), then rotate about i so q lands on the
        // imaginary axis above i; along that vertical geodesic parallel
        // transport preserves theta.
        let q1 = phi_inv(p).inverse().tangent_apply(q);
        let w = (q1.z() - Complex64::i()) / (q1.z() + Complex64::i());
        let heading = w.arg() + FRAC_PI_2;
        let half_turn = 0.5 * (FRAC_PI_2 - heading);
        let q2 = UnimodularMatrix::rotation(half_turn).tangent_apply(&q1);
        angle_gap(q2.theta, FRAC_PI_2 + 2.0 * half_turn)
    };
    d.hypot(dtheta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn identity_is_neutral() {
        let m = UnimodularMatrix::new(2.0, 1.0, 3.0, 2.0).unwrap();
        assert!(UnimodularMatrix::IDENTITY.compose(&m).approx_eq(&m, 0.0));
    }

    #[test]
    fn sign_canonicalization() {
        let m = UnimodularMatrix::new(-2.0, -1.0, -3.0, -2.0).unwrap();
        assert_eq!(m.entries(), [2.0, 1.0, 3.0, 2.0]);
        let n = UnimodularMatrix::new(0.0, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(n.entries(), [0.0, 1.0, -1.0, 0.0]);
    }

    #[test]
    fn renormalizes_determinant() {
        let m = UnimodularMatrix::new(2.0, 0.0, 0.0, 2.0).unwrap();
        assert!(close(m.det(), 1.0, 1e-15));
        assert!(UnimodularMatrix::new(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn geodesic_subgroup() {
        let g = UnimodularMatrix::geodesic(0.7) * UnimodularMatrix::geodesic(-1.9);
        assert!(g.approx_eq(&UnimodularMatrix::geodesic(-1.2), 1e-12));
    }

    #[test]
    fn conjugation_speeds_up_horocycle() {
        let (s, t) = (1.3, -2.2);
        let lhs = UnimodularMatrix::geodesic(-s)
            * UnimodularMatrix::horocycle_pos(t)
            * UnimodularMatrix::geodesic(s);
        assert!(lhs.approx_eq(&UnimodularMatrix::horocycle_pos(t * (-s).exp()), 1e-12));
    }

    #[test]
    fn moebius_examples() {
        let i = Complex64::i();
        let t = UnimodularMatrix::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((t.moebius_apply(i).unwrap() - Complex64::new(1.0, 1.0)).norm() < 1e-15);
        let s = UnimodularMatrix::new(0.0, -1.0, 1.0, 0.0).unwrap();
        assert!((s.moebius_apply(i).unwrap() - i).norm() < 1e-15);
        assert!(matches!(
            s.moebius_apply(Complex64::new(1.0, 0.0)),
            Err(Error::NotInUpperHalfPlane(_))
        ));
    }

    #[test]
    fn tangent_examples() {
        let up = TangentPoint::base();
        let shifted = UnimodularMatrix::horocycle_pos(2.5).tangent_apply(&up);
        assert!(shifted.approx_eq(&TangentPoint::new(2.5, 1.0, FRAC_PI_2).unwrap(), 1e-14));
        // 1/(cz+d)^2 = 1/i^2 = -1 at z = i flips the vector.
        let s = UnimodularMatrix::new(0.0, -1.0, 1.0, 0.0).unwrap();
        let flipped = s.tangent_apply(&up);
        assert!(flipped.approx_eq(
            &TangentPoint::new(0.0, 1.0, 3.0 * FRAC_PI_2).unwrap(),
            1e-14
        ));
    }

    #[test]
    fn phi_examples() {
        assert!(phi(&UnimodularMatrix::IDENTITY).approx_eq(&TangentPoint::base(), 0.0));
        let g = phi(&UnimodularMatrix::geodesic(1.5));
        assert!(g.approx_eq(
            &TangentPoint::new(0.0, 1.5_f64.exp(), FRAC_PI_2).unwrap(),
            1e-12
        ));
        // (1+i)/2 with xi = i/(1+i)^2 = 1/2, a horizontal vector.
        let n = phi(&UnimodularMatrix::horocycle_neg(1.0));
        assert!(n.approx_eq(&TangentPoint::new(0.5, 0.5, 0.0).unwrap(), 1e-14));
    }

    #[test]
    fn phi_round_trip() {
        let p = TangentPoint::new(-3.2, 0.04, 5.9).unwrap();
        assert!(phi(&phi_inv(&p)).approx_eq(&p, 1e-12));
        let m = UnimodularMatrix::new(3.0, -2.0, 7.0, -4.0).unwrap();
        assert!(phi_inv(&phi(&m)).approx_eq(&m, 1e-12));
    }

    #[test]
    fn flow_examples() {
        let up = TangentPoint::base();
        for kind in FlowKind::ALL {
            assert!(flow(&up, kind, 0.0).approx_eq(&up, 1e-15));
        }
        let g = flow(&up, FlowKind::Geodesic, 2.0);
        assert!(g.approx_eq(
            &TangentPoint::new(0.0, 2.0_f64.exp(), FRAC_PI_2).unwrap(),
            1e-12
        ));
        let h = flow(&up, FlowKind::HorocyclePos, -4.0);
        assert!(h.approx_eq(&TangentPoint::new(-4.0, 1.0, FRAC_PI_2).unwrap(), 1e-12));
    }

    #[test]
    fn dist_examples() {
        let p = TangentPoint::new(0.3, 0.8, 1.0).unwrap();
        assert_eq!(dist(&p, &p), 0.0);
        let a = TangentPoint::base();
        let b = TangentPoint::new(0.0, std::f64::consts::E, FRAC_PI_2).unwrap();
        assert!(close(dist(&a, &b), 1.0, 1e-12));
        let c = TangentPoint::new(0.0, 1.0, 0.0).unwrap();
        assert!(close(dist(&c, &a), FRAC_PI_2, 1e-12));
    }

    #[test]
    fn dist_is_symmetric() {
        let p = TangentPoint::new(0.3, 0.8, 1.0).unwrap();
        let q = TangentPoint::new(-1.1, 2.5, 4.0).unwrap();
        assert!(close(dist(&p, &q), dist(&q, &p), 1e-12));
    }
}
