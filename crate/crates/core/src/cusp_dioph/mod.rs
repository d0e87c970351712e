//! Cusp neighbourhoods, excursions of the horocycle tangent to the real
//! axis at `alpha`, and the rational approximations they produce.
//!
//! At level `rho` the cusp region lifts to the horodisc `Im z > 2/rho` and
//! the discs `|qz - p|^2 < (rho/2) Im z` of radius `rho/(4q^2)` tangent at
//! each `p/q`. The *level* of `z` with respect to a cusp is the smallest
//! `rho` for which `z` lies in that cusp's region: `2/Im z` at infinity and
//! `2|qz - p|^2 / Im z` at `p/q`.

mod contfrac;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psl2::TangentPoint;
use crate::quotient::FuchsianGroupSpec;

pub use contfrac::{
    cf_convergents, convergents_from_quotients, semiconvergents, AlphaSpec, PI_MINUS_3,
};

/// A cusp of the upper half-plane: `infinity` or a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CuspId {
    Infinity,
    Rational { p: i64, q: i64 },
}

/// The three cusps of the level-2 surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gamma2Cusp {
    Infinity,
    Zero,
    One,
}

impl CuspId {
    /// Which cusp of the level-2 surface this point of the boundary maps to,
    /// read off from the parities of `p` and `q` (infinity is `1/0`).
    pub fn gamma2_class(self) -> Gamma2Cusp {
        let (p, q) = match self {
            CuspId::Infinity => (1, 0),
            CuspId::Rational { p, q } => (p, q),
        };
        match (p.rem_euclid(2), q.rem_euclid(2)) {
            (1, 0) => Gamma2Cusp::Infinity,
            (0, 1) => Gamma2Cusp::Zero,
            _ => Gamma2Cusp::One,
        }
    }

    /// `q`, with infinity counted as `0`.
    pub fn denominator(self) -> i64 {
        match self {
            CuspId::Infinity => 0,
            CuspId::Rational { q, .. } => q,
        }
    }

    /// Level of `z` with respect to this cusp.
    pub fn level(self, z: Complex64) -> f64 {
        match self {
            CuspId::Infinity => 2.0 / z.im,
            CuspId::Rational { p, q } => 2.0 * (z * q as f64 - p as f64).norm_sqr() / z.im,
        }
    }
}

impl fmt::Display for CuspId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CuspId::Infinity => write!(f, "inf"),
            CuspId::Rational { p, q } => write!(f, "{p}/{q}"),
        }
    }
}

/// The cusp of smallest level `< cap` at `z`, with that level.
///
/// Any `p/q` with level below `cap` satisfies `q^2 Im z < cap / 2` and
/// `|q Re z - p|^2 < (cap/2) Im z - q^2 (Im z)^2`, so the search is finite.
/// For `cap <= 2` the regions are disjoint and at most one cusp qualifies.
pub fn deepest_cusp(z: Complex64, cap: f64) -> Option<(CuspId, f64)> {
    let y = z.im;
    if !(y > 0.0) {
        return None;
    }
    let mut best: Option<(CuspId, f64)> = None;
    let mut consider = |c: CuspId| {
        let l = c.level(z);
        if l < cap && best.is_none_or(|(_, b)| l < b) {
            best = Some((c, l));
        }
    };
    consider(CuspId::Infinity);
    let q_max = (0.5 * cap / y).sqrt().floor() as i64;
    for q in 1..=q_max {
        let qf = q as f64;
        let slack = 0.5 * cap * y - qf * qf * y * y;
        if slack <= 0.0 {
            break;
        }
        let r = slack.sqrt();
        let centre = qf * z.re;
        let lo = (centre - r).ceil() as i64;
        let hi = (centre + r).floor() as i64;
        for p in lo..=hi {
            if p.gcd(&q) == 1 {
                consider(CuspId::Rational { p, q });
            }
        }
    }
    best
}

/// The cusp whose level-`rho` region contains `z`, if any.
///
/// Both built-in groups use the same lifted regions; `group` only fixes
/// which surface the answer is read on.
pub fn region_classify(z: Complex64, rho: f64, group: FuchsianGroupSpec) -> Option<CuspId> {
    let _ = group;
    if !(rho > 0.0 && rho <= 2.0) {
        return None;
    }
    deepest_cusp(z, rho).map(|(c, _)| c)
}

/// Tangent vector whose positive horocycle orbit is the radius-one circle
/// tangent to the real axis at `alpha`, starting from its top point.
pub fn horocycle_start(alpha: f64) -> TangentPoint {
    TangentPoint {
        x: alpha,
        y: 2.0,
        theta: 1.5 * PI,
    }
}

/// Base point of `horocycle_start(alpha) u_+(t)`.
pub fn horocycle_path(alpha: f64, t: f64) -> Complex64 {
    let s = 1.0 / (t * t + 1.0);
    Complex64::new(alpha - 2.0 * t * s, 2.0 * s)
}

/// One visit of the horocycle path to a cusp region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcursionEvent {
    pub t_enter: f64,
    pub t_exit: f64,
    pub cusp: CuspId,
    /// Smallest level reached during the visit.
    pub depth_rho: f64,
}

impl ExcursionEvent {
    /// Time at which the visit is deepest.
    pub fn t_deepest(&self, alpha: f64) -> f64 {
        let t = match self.cusp {
            CuspId::Infinity => 0.0,
            CuspId::Rational { p, q } => {
                let d = q as f64 * alpha - p as f64;
                2.0 * q as f64 / d
            }
        };
        t.clamp(self.t_enter, self.t_exit)
    }
}

fn check_rho_open(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "rho = {rho} outside (0, 2)"
        )))
    }
}

fn event(alpha: f64, cusp: CuspId, t_enter: f64, t_exit: f64) -> ExcursionEvent {
    let mut ev = ExcursionEvent {
        t_enter,
        t_exit,
        cusp,
        depth_rho: 0.0,
    };
    ev.depth_rho = cusp.level(horocycle_path(alpha, ev.t_deepest(alpha)));
    ev
}

/// Scans `t in [0, t_max]` for visits to the level-`rho` cusp region.
///
/// The grid is uniform in the angle `psi = 2 atan t` around the horocycle
/// circle with step `dpsi`; boundary crossings are refined by bisection to
/// `1e-9`. A visit whose angular extent is below `dpsi` can be missed.
pub fn excursions(alpha: f64, rho: f64, t_max: f64, dpsi: f64) -> Result<Vec<ExcursionEvent>> {
    check_rho_open(rho)?;
    if !(t_max > 0.0 && dpsi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need t_max > 0 and dpsi > 0 (t_max = {t_max}, dpsi = {dpsi})"
        )));
    }
    let inside = |c: CuspId, t: f64| c.level(horocycle_path(alpha, t)) < rho;
    let refine = |c: CuspId, mut out_t: f64, mut in_t: f64| {
        while (out_t - in_t).abs() > 1e-9 {
            let mid = 0.5 * (out_t + in_t);
            if inside(c, mid) {
                in_t = mid;
            } else {
                out_t = mid;
            }
        }
        in_t
    };
    let psi_max = 2.0 * t_max.atan();
    let steps = (psi_max / dpsi).ceil() as usize;
    let mut events = Vec::new();
    let mut open: Option<(CuspId, f64)> = None;
    let mut prev_t = 0.0;
    for k in 0..=steps {
        let t = if k == steps {
            t_max
        } else {
            (0.5 * k as f64 * dpsi).tan()
        };
        let hit = region_classify(horocycle_path(alpha, t), rho, FuchsianGroupSpec::Gamma2);
        match (open, hit) {
            (Some((c, _)), Some(h)) if c == h => {}
            (current, hit) => {
                if let Some((c, start)) = current {
                    events.push(event(alpha, c, start, refine(c, t, prev_t)));
                }
                open = hit.map(|h| (h, if k == 0 { 0.0 } else { refine(h, prev_t, t) }));
            }
        }
        prev_t = t;
    }
    if let Some((c, start)) = open {
        events.push(event(alpha, c, start, t_max));
    }
    Ok(events)
}

/// All visits with `t in [0, t_max]`, from the closed form of the level
/// along the path: for `p/q` it is `(D t - 2q)^2 + D^2` with `D = q alpha - p`,
/// and `t^2 + 1` at infinity.
pub fn excursions_exact(alpha: f64, rho: f64, t_max: f64) -> Result<Vec<ExcursionEvent>> {
    check_rho_open(rho)?;
    if !(t_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_max = {t_max} must be positive"
        )));
    }
    let sr = rho.sqrt();
    let mut events = Vec::new();
    if rho > 1.0 {
        events.push(event(
            alpha,
            CuspId::Infinity,
            0.0,
            (rho - 1.0).sqrt().min(t_max),
        ));
    }
    // 2q - sqrt(rho) < D t_max < sqrt(rho) t_max
    let q_max = (0.5 * sr * (t_max + 1.0)).ceil() as i64;
    for q in 1..=q_max {
        let qf = q as f64;
        let lo = (qf * alpha - sr).floor() as i64;
        let hi = (qf * alpha).ceil() as i64;
        for p in lo..=hi {
            let d = qf * alpha - p as f64;
            if !(d > 0.0) || d * d >= rho || p.gcd(&q) != 1 {
                continue;
            }
            let w = (rho - d * d).sqrt();
            let (enter, exit) = ((2.0 * qf - w) / d, (2.0 * qf + w) / d);
            if enter < t_max {
                events.push(event(
                    alpha,
                    CuspId::Rational { p, q },
                    enter,
                    exit.min(t_max),
                ));
            }
        }
    }
    events.sort_by(|a, b| a.t_enter.total_cmp(&b.t_enter));
    Ok(events)
}

/// Visits during `t in [-t_max, 0]`, reported with negative times.
///
/// Uses the reflection `z(-t; alpha) = -conj z(t; -alpha)`.
pub fn excursions_exact_backward(alpha: f64, rho: f64, t_max: f64) -> Result<Vec<ExcursionEvent>> {
    let mut events: Vec<ExcursionEvent> = excursions_exact(-alpha, rho, t_max)?
        .into_iter()
        .map(|e| ExcursionEvent {
            t_enter: -e.t_exit,
            t_exit: -e.t_enter,
            cusp: match e.cusp {
                CuspId::Infinity => CuspId::Infinity,
                CuspId::Rational { p, q } => CuspId::Rational { p: -p, q },
            },
            depth_rho: e.depth_rho,
        })
        .collect();
    events.sort_by(|a, b| b.t_enter.total_cmp(&a.t_enter));
    Ok(events)
}

/// A rational approximation read off from the first visit at level `rho`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalApprox {
    pub p: i64,
    pub q: i64,
    pub err: f64,
    /// Entry time of the witnessing visit.
    pub t_found: f64,
    pub rho: f64,
    /// The time bound `(1 + eps) 2 pi / (3 rho)` the entry is compared with.
    pub t_bound: f64,
}

impl RationalApprox {
    /// `|alpha - p/q| * q^2`.
    pub fn scaled_err(&self) -> f64 {
        self.err * (self.q as f64).powi(2)
    }

    pub fn within_time_bound(&self) -> bool {
        self.t_found < self.t_bound
    }
}

/// First visit at each level of `rho_seq`, with no bound checks.
pub fn approximant_scan(alpha: f64, rho_seq: &[f64], eps: f64) -> Result<Vec<RationalApprox>> {
    let mut out = Vec::with_capacity(rho_seq.len());
    for &rho in rho_seq {
        check_rho_open(rho)?;
        let t_bound = (1.0 + eps) * 2.0 * PI / (3.0 * rho);
        let mut horizon = 2.0 * t_bound;
        let first = loop {
            let found = excursions_exact(alpha, rho, horizon)?
                .into_iter()
                .find(|e| e.cusp != CuspId::Infinity);
            if let Some(e) = found {
                break e;
            }
            if horizon > 1e9 {
                return Err(Error::NoSolution(format!(
                    "no visit at rho = {rho} before t = {horizon}"
                )));
            }
            horizon *= 2.0;
        };
        let CuspId::Rational { p, q } = first.cusp else {
            unreachable!("infinity filtered above")
        };
        out.push(RationalApprox {
            p,
            q,
            err: (alpha - p as f64 / q as f64).abs(),
            t_found: first.t_enter,
            rho,
            t_bound,
        });
    }
    Ok(out)
}

/// Like [`approximant_scan`], failing with `BoundViolated` if some
/// approximant has `|alpha - p/q| >= (1 + eps) pi / (3 q^2)`.
pub fn approximants(alpha: f64, rho_seq: &[f64], eps: f64) -> Result<Vec<RationalApprox>> {
    if rho_seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("rho_seq must be decreasing".into()));
    }
    let found = approximant_scan(alpha, rho_seq, eps)?;
    for a in &found {
        let bound = (1.0 + eps) * PI / (3.0 * (a.q as f64).powi(2));
        if a.err >= bound {
            return Err(Error::BoundViolated {
                p: a.p,
                q: a.q,
                err: a.err,
                bound,
            });
        }
    }
    Ok(found)
}

/// Growth functions for [`khinchin_count`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthFn {
    NLogN,
}

impl GrowthFn {
    pub fn eval(self, n: f64) -> f64 {
        match self {
            GrowthFn::NLogN => n * n.ln(),
        }
    }
}

/// Number of reduced `p/q` with `2 <= q <= q_max` and
/// `|alpha - p/q| < 1/(q g(q))`.
///
/// `q = 1` is excluded: `g(1) = 0` and every integer would qualify.
pub fn khinchin_count(alpha: f64, g: GrowthFn, q_max: u64) -> Result<u64> {
    if q_max < 2 {
        return Err(Error::InvalidParameter("q_max must be at least 2".into()));
    }
    let mut count = 0;
    for q in 2..=q_max {
        let qf = q as f64;
        let tol = 1.0 / g.eval(qf);
        let lo = (qf * alpha - tol).floor() as i64;
        let hi = (qf * alpha + tol).ceil() as i64;
        for p in lo..=hi {
            if p.gcd(&(q as i64)) == 1 && (qf * alpha - p as f64).abs() < tol {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psl2::{flow, FlowKind};

    fn golden() -> f64 {
        0.5 * (1.0 + 5f64.sqrt())
    }

    #[test]
    fn classify_examples() {
        let g = FuchsianGroupSpec::Gamma2;
        assert_eq!(
            region_classify(Complex64::new(0.0, 5.0), 0.5, g),
            Some(CuspId::Infinity)
        );
        let z = Complex64::new(0.0, 0.5 / 8.0);
        assert_eq!(
            region_classify(z, 0.5, g),
            Some(CuspId::Rational { p: 0, q: 1 })
        );
        assert_eq!(region_classify(Complex64::new(0.5, 0.5), 0.1, g), None);
        // tangent disc at 1/2 for rho = 1: radius 1/16 centred at 1/2 + i/16
        let inside = Complex64::new(0.5, 1.0 / 16.0);
        assert_eq!(
            region_classify(inside, 1.0, g),
            Some(CuspId::Rational { p: 1, q: 2 })
        );
        assert_eq!(region_classify(inside, 1.0 / 3.0, g), None);
    }

    #[test]
    fn classify_matches_exhaustive_search() {
        let pts = [(0.31, 0.02), (-0.7, 0.004), (0.5001, 0.0003), (2.2, 0.3)];
        for (x, y) in pts {
            let z = Complex64::new(x, y);
            let brute = (1..200)
                .flat_map(|q: i64| (-600..600).map(move |p| (p, q)))
                .find(|&(p, q)| p.gcd(&q) == 1 && CuspId::Rational { p, q }.level(z) < 0.8)
                .map(|(p, q)| CuspId::Rational { p, q });
            let brute = if 2.0 / y < 0.8 {
                Some(CuspId::Infinity)
            } else {
                brute
            };
            assert_eq!(
                region_classify(z, 0.8, FuchsianGroupSpec::Modular),
                brute,
                "{z}"
            );
        }
    }

    #[test]
    fn gamma2_classes() {
        assert_eq!(CuspId::Infinity.gamma2_class(), Gamma2Cusp::Infinity);
        assert_eq!(
            CuspId::Rational { p: 1, q: 2 }.gamma2_class(),
            Gamma2Cusp::Infinity
        );
        assert_eq!(
            CuspId::Rational { p: 0, q: 1 }.gamma2_class(),
            Gamma2Cusp::Zero
        );
        assert_eq!(
            CuspId::Rational { p: -2, q: 3 }.gamma2_class(),
            Gamma2Cusp::Zero
        );
        assert_eq!(
            CuspId::Rational { p: -1, q: 1 }.gamma2_class(),
            Gamma2Cusp::One
        );
    }

    #[test]
    fn path_examples() {
        assert_eq!(horocycle_path(0.3, 0.0), Complex64::new(0.3, 2.0));
        assert_eq!(horocycle_path(0.3, 1.0), Complex64::new(0.3 - 1.0, 1.0));
        let t = 1e3;
        let z = horocycle_path(0.3, t);
        let expect = Complex64::new(0.3 - 2e3 / (1e6 + 1.0), 2.0 / (1e6 + 1.0));
        assert!((z - expect).norm() < 1e-15);
    }

    #[test]
    fn path_agrees_with_matrix_flow() {
        let alpha = golden();
        let start = horocycle_start(alpha);
        for t in [0.0, 0.5, 1.0, 7.3, 100.0, 1e3, -4.0] {
            let p = flow(&start, FlowKind::HorocyclePos, t);
            assert!((p.z() - horocycle_path(alpha, t)).norm() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn exact_excursion_chord_endpoints_are_on_the_disc_boundary() {
        let alpha = 2f64.sqrt();
        for e in excursions_exact(alpha, 0.5, 1e3).unwrap() {
            let c = e.cusp;
            assert!((c.level(horocycle_path(alpha, e.t_enter)) - 0.5).abs() < 1e-6);
            if e.t_exit < 1e3 {
                assert!((c.level(horocycle_path(alpha, e.t_exit)) - 0.5).abs() < 1e-6);
            }
            assert!(e.depth_rho < 0.5 && e.depth_rho > 0.0);
        }
    }

    #[test]
    fn grid_scan_matches_exact_enumeration() {
        let alpha = 2f64.sqrt();
        let dpsi = 2e-5;
        let grid = excursions(alpha, 0.5, 300.0, dpsi).unwrap();
        let exact = excursions_exact(alpha, 0.5, 300.0).unwrap();
        for g in &grid {
            let e = exact
                .iter()
                .find(|e| e.cusp == g.cusp)
                .expect("grid visit is real");
            assert!((g.t_enter - e.t_enter).abs() < 1e-6);
            assert!((g.t_exit - e.t_exit).abs() < 1e-6);
            assert!((g.depth_rho - e.depth_rho).abs() < 1e-9);
        }
        // only visits narrower than the angular step may be skipped
        let width = |e: &ExcursionEvent| 2.0 * (e.t_exit.atan() - e.t_enter.atan());
        let missed: Vec<_> = exact
            .iter()
            .filter(|e| !grid.iter().any(|g| g.cusp == e.cusp))
            .collect();
        assert!(missed.iter().all(|e| width(e) < dpsi));
        assert!(missed.len() <= 2);
        let fine = excursions(alpha, 0.5, 300.0, 2e-6).unwrap();
        assert_eq!(fine.len(), exact.len());
    }

    #[test]
    fn infinity_visit_for_large_rho() {
        let ev = excursions_exact(golden(), 1.5, 10.0).unwrap();
        assert_eq!(ev[0].cusp, CuspId::Infinity);
        assert!((ev[0].t_exit - 0.5f64.sqrt()).abs() < 1e-12);
        let grid = excursions(golden(), 1.5, 10.0, 1e-4).unwrap();
        assert_eq!(grid[0].cusp, CuspId::Infinity);
        assert!((grid[0].t_exit - 0.5f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn backward_visits_mirror_forward_ones() {
        let alpha = 0.3;
        let back = excursions_exact_backward(alpha, 0.4, 50.0).unwrap();
        assert!(!back.is_empty());
        for e in back {
            assert!(e.t_exit <= 0.0);
            let mid = 0.5 * (e.t_enter + e.t_exit);
            assert!(e.cusp.level(horocycle_path(alpha, mid)) < 0.4);
        }
    }

    #[test]
    fn approximant_rejects_increasing_levels() {
        assert!(approximants(golden(), &[0.1, 0.2], 0.01).is_err());
    }

    #[test]
    fn golden_fibonacci_approximants() {
        let rho: Vec<f64> = (1..=30).map(|n| 1.0 / n as f64).collect();
        let found = approximant_scan(golden(), &rho, 0.01).unwrap();
        let fib = [(1, 1), (2, 1), (3, 2), (5, 3), (8, 5), (13, 8)];
        assert!(found.iter().any(|a| fib.contains(&(a.p, a.q)) && a.q >= 3));
    }

    #[test]
    fn khinchin_examples() {
        // q = 2 by hand: |alpha - p/2| < 1/(4 ln 2) ~ 0.36
        let alpha = 0.3;
        let brute = (-5..5)
            .filter(|&p: &i64| {
                p.gcd(&2) == 1 && (alpha - p as f64 / 2.0).abs() < 1.0 / (4.0 * 2f64.ln())
            })
            .count() as u64;
        assert_eq!(khinchin_count(alpha, GrowthFn::NLogN, 2).unwrap(), brute);
        assert!(khinchin_count(golden(), GrowthFn::NLogN, 10_000).unwrap() < 10);
        assert!(khinchin_count(alpha, GrowthFn::NLogN, 1).is_err());
    }
}
