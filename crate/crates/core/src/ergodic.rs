//! Time averages along horocycle orbits and Haar averages over the
//! quotient.
//!
//! `omega_X` is the Haar measure `dx dy dtheta / y^2` on the fundamental
//! domain times `[0, 2 pi)`, divided by its total mass.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cusp_dioph::{deepest_cusp, region_classify};
use crate::error::{Error, Result};
use crate::psl2::{dist, flow, FlowKind, TangentPoint};
use crate::quotient::{bundle_volume, reduce, DomainSampler, FuchsianGroupSpec, ReducedPoint};
use crate::sampling::{sharded_mean, McEstimate};

/// `exp(1 - 1/(1 - u^2))` on `[0, 1)`, zero beyond.
pub fn bump_profile(u: f64) -> f64 {
    let u = u.abs();
    if u >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// A smooth bump `f(p) = c * profile(d(p, center) / radius)` on the unit
/// tangent bundle of the quotient, supported in the part of the surface
/// where every cusp level is at least `rho_support`.
#[derive(Clone, Debug)]
pub struct BumpFunction {
    pub center: ReducedPoint,
    pub radius: f64,
    pub normalization: f64,
    pub rho_support: f64,
    pub group: FuchsianGroupSpec,
    translates: Vec<TangentPoint>,
}

impl BumpFunction {
    /// Unit-amplitude bump (normalization 1).
    ///
    /// Fails with `SupportEscapesCutoff` unless the hyperbolic ball of
    /// radius `radius` about the center keeps every cusp level at least
    /// `rho_support`. Levels change by at most a factor `e^r` over a
    /// distance `r`, so it is enough that the center's levels are all at
    /// least `rho_support * e^radius`.
    pub fn new(
        center: &TangentPoint,
        radius: f64,
        rho_support: f64,
        group: FuchsianGroupSpec,
    ) -> Result<Self> {
        if !(radius > 0.0 && rho_support > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius = {radius} and rho_support = {rho_support} must be positive"
            )));
        }
        let center = reduce(center, group)?;
        let cap = rho_support * radius.exp();
        if let Some((cusp, level)) = deepest_cusp(center.point.z(), cap) {
            return Err(Error::SupportEscapesCutoff(format!(
                "center is at level {level:.4} of cusp {cusp}, need at least {cap:.4}"
            )));
        }
        let translates = group
            .short_words()
            .iter()
            .map(|w| w.tangent_apply(&center.point))
            .collect();
        Ok(BumpFunction {
            center,
            radius,
            normalization: 1.0,
            rho_support,
            group,
            translates,
        })
    }

    pub fn scaled(&self, k: f64) -> Self {
        BumpFunction {
            normalization: self.normalization * k,
            ..self.clone()
        }
    }

    /// Rescales to unit integral using [`space_average`].
    pub fn normalized(&self, n_samples: usize, seed: u64) -> Result<Self> {
        let est = space_average(&self.scaled(1.0 / self.normalization), n_samples, seed)?;
        if !(est.mean > 0.0) {
            return Err(Error::InvalidParameter("bump has zero integral".into()));
        }
        Ok(BumpFunction {
            normalization: 1.0 / est.mean,
            ..self.clone()
        })
    }

    /// Value at a point of the fundamental domain.
    pub fn eval(&self, p: &TangentPoint) -> f64 {
        if self.normalization == 0.0 {
            return 0.0;
        }
        // cosh d_hyp = 1 + |z - w|^2 / (2 y y'); skip translates that are
        // already too far in the base before computing the full proxy.
        let reject = self.radius.cosh() - 1.0;
        let z = p.z();
        let mut best = f64::INFINITY;
        for c in &self.translates {
            if (z - c.z()).norm_sqr() >= 2.0 * reject * p.y * c.y {
                continue;
            }
            best = best.min(dist(p, c));
        }
        self.normalization * bump_profile(best / self.radius)
    }

    /// Value at an arbitrary point (reduced first).
    pub fn eval_any(&self, p: &TangentPoint) -> Result<f64> {
        Ok(self.eval(&reduce(p, self.group)?.point))
    }

    /// The largest value, attained at the center.
    pub fn max_value(&self) -> f64 {
        self.normalization
    }

    // Euclidean disc of the hyperbolic support ball: (centre, radius).
    fn support_disc(&self) -> (Complex64, f64) {
        let c = self.center.point;
        (
            Complex64::new(c.x, c.y * self.radius.cosh()),
            c.y * self.radius.sinh(),
        )
    }

    /// True when the support ball lies inside the fundamental domain.
    pub fn support_in_domain(&self) -> bool {
        let (m, r) = self.support_disc();
        match self.group {
            FuchsianGroupSpec::Modular => m.re.abs() + r <= 0.5 && m.norm() >= 1.0 + r,
            FuchsianGroupSpec::Gamma2 => {
                m.re.abs() + r <= 1.0 && (m - 0.5).norm() >= 0.5 + r && (m + 0.5).norm() >= 0.5 + r
            }
        }
    }
}

/// Both sides of the equidistribution limit at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageReport {
    pub t: f64,
    pub time_avg: f64,
    pub space_avg: f64,
    pub mc_stderr: f64,
    pub quadrature_step: f64,
}

impl AverageReport {
    pub fn relative_gap(&self) -> f64 {
        (self.time_avg - self.space_avg).abs() / self.space_avg.abs()
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n < 1000 {
        return Err(Error::InvalidParameter(format!(
            "n_samples = {n} below 1000"
        )));
    }
    Ok(())
}

/// Monte Carlo `∫ f d omega_X` over the support box of `f`.
///
/// The support lies in the hyperbolic ball about the center, whose
/// `(x, 1/y)` bounding box is known, and directions within the proxy
/// radius differ from the center's by at most `2 radius` (at most `radius`
/// from the transported angle, at most `radius` from transport itself).
/// In the coordinates `(x, u = 1/y, theta)` the Haar density is constant,
/// so a uniform box sample is exact up to Monte Carlo noise.
pub fn space_average(f: &BumpFunction, n_samples: usize, seed: u64) -> Result<McEstimate> {
    check_samples(n_samples)?;
    if !f.support_in_domain() {
        return Err(Error::SupportEscapesCutoff(
            "support ball crosses the fundamental domain boundary".into(),
        ));
    }
    let c = f.center.point;
    let r = f.radius;
    let half_x = c.y * r.sinh();
    let (u_lo, u_hi) = ((c.y * r.exp()).recip(), (c.y * (-r).exp()).recip());
    let half_t = (2.0 * r).min(0.5 * TAU);
    let volume = 2.0 * half_x * (u_hi - u_lo) * 2.0 * half_t;
    let scale = volume / bundle_volume(f.group);
    let est = sharded_mean(n_samples, seed, |rng| {
        let x = c.x + rng.random_range(-half_x..half_x);
        let u = rng.random_range(u_lo..u_hi);
        let theta = c.theta + rng.random_range(-half_t..half_t);
        f.eval(&TangentPoint::from_raw(x, u.recip(), theta))
    });
    Ok(McEstimate {
        mean: scale * est.mean,
        stderr: scale * est.stderr,
    })
}

/// Monte Carlo `∫ f d omega_X` by uniform sampling of the whole fundamental
/// domain. The real cusps are cut at level `rho_support`, where `f`
/// vanishes.
pub fn space_average_domain(f: &BumpFunction, n_samples: usize, seed: u64) -> Result<McEstimate> {
    check_samples(n_samples)?;
    let rho_cut = f.rho_support.min(2.0);
    let sampler = DomainSampler::new(f.group, rho_cut)?;
    let scale = sampler.box_area() * TAU / bundle_volume(f.group);
    let est = sharded_mean(n_samples, seed, |rng| match sampler.propose(rng) {
        Some(z) => {
            let theta = rng.random_range(0.0..TAU);
            f.eval(&TangentPoint::from_raw(z.re, z.im, theta))
        }
        None => 0.0,
    });
    Ok(McEstimate {
        mean: scale * est.mean,
        stderr: scale * est.stderr,
    })
}

/// Visits the midpoints `x0 u_+((k + 1/2) h)`, `k = 0..n`, each reduced
/// into the fundamental domain. Every step flows the previous reduced
/// point, so no long matrix products build up.
pub fn sweep_orbit<F>(
    x0: &ReducedPoint,
    h: f64,
    n: usize,
    group: FuchsianGroupSpec,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, &TangentPoint),
{
    let mut p = reduce(&flow(&x0.point, FlowKind::HorocyclePos, 0.5 * h), group)?.point;
    for k in 0..n {
        visit(k, &p);
        if k + 1 < n {
            p = reduce(&flow(&p, FlowKind::HorocyclePos, h), group)?.point;
        }
    }
    Ok(())
}

fn check_time_step(t: f64, h: f64) -> Result<usize> {
    if !(t > 0.0 && h > 0.0 && h <= t) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < h <= T (T = {t}, h = {h})"
        )));
    }
    Ok((t / h).round().max(1.0) as usize)
}

/// Midpoint-rule `(1/T) ∫_0^T f(x0 u_+(t)) dt`.
pub fn birkhoff_average(
    x0: &ReducedPoint,
    f: &BumpFunction,
    t: f64,
    h: f64,
    group: FuchsianGroupSpec,
) -> Result<f64> {
    let n = check_time_step(t, h)?;
    if h > f.radius / 10.0 {
        return Err(Error::InvalidParameter(format!(
            "step {h} does not resolve a bump of radius {}",
            f.radius
        )));
    }
    let mut acc = 0.0;
    sweep_orbit(x0, h, n, group, |_, p| acc += f.eval(p))?;
    Ok(acc / n as f64)
}

/// Birkhoff averages at every time in `t_list` from one sweep.
pub fn equidistribution_curve(
    x0: &ReducedPoint,
    f: &BumpFunction,
    t_list: &[f64],
    h: f64,
    group: FuchsianGroupSpec,
    space: McEstimate,
) -> Result<Vec<AverageReport>> {
    if t_list.is_empty() {
        return Ok(Vec::new());
    }
    if t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("T list must be increasing".into()));
    }
    let counts: Vec<usize> = t_list
        .iter()
        .map(|&t| check_time_step(t, h))
        .collect::<Result<_>>()?;
    if h > f.radius / 10.0 {
        return Err(Error::InvalidParameter(format!(
            "step {h} does not resolve a bump of radius {}",
            f.radius
        )));
    }
    let total = *counts.last().expect("non-empty");
    let mut acc = 0.0;
    let mut reports = Vec::with_capacity(t_list.len());
    let mut next = 0;
    sweep_orbit(x0, h, total, group, |k, p| {
        acc += f.eval(p);
        while next < counts.len() && counts[next] == k + 1 {
            reports.push(AverageReport {
                t: t_list[next],
                time_avg: acc / counts[next] as f64,
                space_avg: space.mean,
                mc_stderr: space.stderr,
                quadrature_step: h,
            });
            next += 1;
        }
    })?;
    Ok(reports)
}

/// Fraction of midpoints `x0 u_+((k + 1/2) h)` outside every level-`rho`
/// cusp region.
pub fn occupancy_fraction(
    x0: &ReducedPoint,
    rho: f64,
    t: f64,
    h: f64,
    group: FuchsianGroupSpec,
) -> Result<f64> {
    if !(rho > 0.0 && rho < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho} outside (0, 2)"
        )));
    }
    let n = check_time_step(t, h)?;
    let mut core = 0usize;
    sweep_orbit(x0, h, n, group, |_, p| {
        if region_classify(p.z(), rho, group).is_none() {
            core += 1;
        }
    })?;
    Ok(core as f64 / n as f64)
}

/// `omega_X` mass of the part of the surface outside the level-`rho`
/// cusp regions: `1 - 3 rho / (2 pi)` for both groups.
pub fn expected_core_fraction(group: FuchsianGroupSpec, rho: f64) -> Result<f64> {
    Ok(1.0 - crate::quotient::cusp_region_area(group, rho)? / crate::quotient::covolume(group))
}

/// Ratio of the time the line `y = eps` spends in the level-`rho` disc at
/// the cusp `0` to the time it spends in the level-2 disc but outside the
/// level-`rho` one. The discs have radii `rho/4` and `1/2`; the chords are
/// exact circle intersections.
pub fn line_excursion_ratio(rho: f64, eps: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 2.0 && eps > 0.0 && eps < 0.5 * rho) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < rho < 2 and 0 < eps < rho/2 (rho = {rho}, eps = {eps})"
        )));
    }
    let chord = |radius: f64| (2.0 * radius * eps - eps * eps).sqrt();
    let inner = chord(0.25 * rho);
    Ok(inner / (chord(0.5) - inner))
}

/// The same ratio measured by running the horocycle flow along `y = eps`
/// with step `h` and classifying each midpoint by its level at the cusp `0`.
pub fn line_excursion_ratio_sampled(rho: f64, eps: f64, h: f64) -> Result<f64> {
    line_excursion_ratio(rho, eps)?;
    // The flow moves x at speed eps; the level-2 disc spans |x| < 1.
    let n = (2.0 / (eps * h)).ceil() as usize;
    let start = TangentPoint::new(-1.0, eps, FRAC_PI_2)?;
    let (mut deep, mut shallow) = (0usize, 0usize);
    for k in 0..n {
        let p = flow(&start, FlowKind::HorocyclePos, (k as f64 + 0.5) * h);
        let level = 2.0 * p.z().norm_sqr() / p.y;
        if level < rho {
            deep += 1;
        } else if level < 2.0 {
            shallow += 1;
        }
    }
    Ok(deep as f64 / shallow as f64)
}

/// Start of the horocycle tangent to the real axis at `alpha`, reduced.
pub fn generic_start(alpha: f64, group: FuchsianGroupSpec) -> Result<ReducedPoint> {
    reduce(&crate::cusp_dioph::horocycle_start(alpha), group)
}

/// A point on the closed horocycle `Im z = y0` around the cusp at infinity.
pub fn periodic_start(y0: f64, group: FuchsianGroupSpec) -> Result<ReducedPoint> {
    reduce(&TangentPoint::new(0.0, y0, FRAC_PI_2)?, group)
}
