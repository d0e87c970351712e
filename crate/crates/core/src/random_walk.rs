//! Uncentered random walks along a horocycle orbit.
//!
//! The walk after `m` steps sits at `x0 u_+(t)` with `t` distributed as the
//! `m`-fold convolution of the step law. Choosing `m a` at the deepest time
//! of a cusp visit, with spread `b sqrt(m)` small against the visit's
//! length, keeps most of the walk's mass away from a bump in the core.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::cusp_dioph::{excursions_exact, excursions_exact_backward, CuspId, ExcursionEvent};
use crate::ergodic::{sweep_orbit, BumpFunction};
use crate::error::{Error, Result};
use crate::psl2::{flow, FlowKind, TangentPoint};
use crate::quotient::{reduce, FuchsianGroupSpec, ReducedPoint};
use crate::sampling::{sharded_mean, McEstimate};

/// Default constant `c` in the spread condition `b sqrt(m) < c / sqrt(rho)`.
pub const SPREAD_CONSTANT: f64 = 0.1;

/// Step law of the walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepDistribution {
    Gaussian {
        mean: f64,
        std: f64,
    },
    /// `shift + Exp(rate)`.
    ShiftedExponential {
        rate: f64,
        shift: f64,
    },
    Empirical {
        samples: Vec<f64>,
    },
    /// Degenerate law with zero variance. Only useful for checking the
    /// walk machinery, since the schedule needs `b > 0`.
    PointMass {
        at: f64,
    },
}

impl StepDistribution {
    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        StepDistribution::Gaussian { mean, std }.validated()
    }

    pub fn shifted_exponential(rate: f64, shift: f64) -> Result<Self> {
        StepDistribution::ShiftedExponential { rate, shift }.validated()
    }

    pub fn empirical(samples: Vec<f64>) -> Result<Self> {
        StepDistribution::Empirical { samples }.validated()
    }

    pub fn point_mass(at: f64) -> Result<Self> {
        if at == 0.0 || !at.is_finite() {
            return Err(Error::InvalidParameter(
                "point mass must be at a nonzero value".into(),
            ));
        }
        Ok(StepDistribution::PointMass { at })
    }

    fn validated(self) -> Result<Self> {
        if let StepDistribution::ShiftedExponential { rate, .. } = self {
            if !(rate > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "rate = {rate} must be positive"
                )));
            }
        }
        if let StepDistribution::Empirical { samples } = &self {
            if samples.len() < 2 || samples.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(
                    "need at least two finite samples".into(),
                ));
            }
        }
        let (a, b) = (self.mean(), self.std());
        if !(a != 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mean {a} must be nonzero and finite"
            )));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "std {b} must be positive and finite"
            )));
        }
        Ok(self)
    }

    /// `a`.
    pub fn mean(&self) -> f64 {
        match self {
            StepDistribution::Gaussian { mean, .. } => *mean,
            StepDistribution::ShiftedExponential { rate, shift } => shift + rate.recip(),
            StepDistribution::Empirical { samples } => {
                samples.iter().sum::<f64>() / samples.len() as f64
            }
            StepDistribution::PointMass { at } => *at,
        }
    }

    /// `b`.
    pub fn std(&self) -> f64 {
        match self {
            StepDistribution::Gaussian { std, .. } => *std,
            StepDistribution::ShiftedExponential { rate, .. } => rate.recip(),
            StepDistribution::Empirical { samples } => {
                let a = self.mean();
                let n = samples.len() as f64;
                (samples.iter().map(|v| (v - a).powi(2)).sum::<f64>() / n).sqrt()
            }
            StepDistribution::PointMass { .. } => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            StepDistribution::Gaussian { mean, std } => {
                Normal::new(*mean, *std).expect("validated").sample(rng)
            }
            StepDistribution::ShiftedExponential { rate, shift } => {
                shift + Exp::new(*rate).expect("validated").sample(rng)
            }
            StepDistribution::Empirical { samples } => samples[rng.random_range(0..samples.len())],
            StepDistribution::PointMass { at } => *at,
        }
    }

    /// One draw of the sum of `m` independent steps. The Gaussian and point
    /// mass cases use the closed-form convolution.
    pub fn sample_sum<R: Rng + ?Sized>(&self, rng: &mut R, m: u64) -> f64 {
        match self {
            StepDistribution::Gaussian { mean, std } => {
                let mf = m as f64;
                Normal::new(mean * mf, std * mf.sqrt())
                    .expect("validated")
                    .sample(rng)
            }
            StepDistribution::PointMass { at } => at * m as f64,
            _ => (0..m).map(|_| self.sample(rng)).sum(),
        }
    }
}

/// Reduced orbit points `x0 u_+(k delta)` for integer `k` in a range, so
/// that `x0 u_+(t)` is one short flow away from a stored point.
#[derive(Clone, Debug)]
pub struct OrbitTable {
    delta: f64,
    k_lo: i64,
    points: Vec<TangentPoint>,
    group: FuchsianGroupSpec,
}

impl OrbitTable {
    /// Covers `[t_lo, t_hi]` (which may straddle 0).
    pub fn new(
        x0: &ReducedPoint,
        t_lo: f64,
        t_hi: f64,
        delta: f64,
        group: FuchsianGroupSpec,
    ) -> Result<Self> {
        if !(delta > 0.0 && t_lo <= t_hi) {
            return Err(Error::InvalidParameter(
                "need delta > 0 and t_lo <= t_hi".into(),
            ));
        }
        let k_lo = ((t_lo / delta).floor() as i64).min(0);
        let k_hi = ((t_hi / delta).ceil() as i64).max(0);
        let step = |p: &TangentPoint, dir: f64| -> Result<TangentPoint> {
            Ok(reduce(&flow(p, FlowKind::HorocyclePos, dir * delta), group)?.point)
        };
        let mut back = vec![x0.point];
        for _ in k_lo..0 {
            let next = step(back.last().expect("non-empty"), -1.0)?;
            back.push(next);
        }
        back.reverse();
        let mut points = back;
        for _ in 0..k_hi {
            let next = step(points.last().expect("non-empty"), 1.0)?;
            points.push(next);
        }
        Ok(OrbitTable {
            delta,
            k_lo,
            points,
            group,
        })
    }

    /// `x0 u_+(t)`, reduced.
    pub fn at(&self, t: f64) -> Result<TangentPoint> {
        let k_hi = self.k_lo + self.points.len() as i64 - 1;
        let k = ((t / self.delta).round() as i64).clamp(self.k_lo, k_hi);
        let mut p = self.points[(k - self.k_lo) as usize];
        let mut rest = t - k as f64 * self.delta;
        // Outside the table: walk from the nearest end in table-sized steps.
        while rest.abs() > self.delta {
            let s = self.delta.copysign(rest);
            p = reduce(&flow(&p, FlowKind::HorocyclePos, s), self.group)?.point;
            rest -= s;
        }
        Ok(reduce(&flow(&p, FlowKind::HorocyclePos, rest), self.group)?.point)
    }
}

/// Monte Carlo `∫ f(x0 u_+(t)) mu^{*m}(dt)`.
#[allow(clippy::too_many_arguments)]
pub fn convolution_average(
    x0: &ReducedPoint,
    f: &BumpFunction,
    mu: &StepDistribution,
    m: u64,
    n_samples: usize,
    seed: u64,
    group: FuchsianGroupSpec,
) -> Result<McEstimate> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let centre = mu.mean() * m as f64;
    let spread = 10.0 * mu.std() * (m as f64).sqrt() + 2.0;
    let table = OrbitTable::new(x0, centre - spread, centre + spread, 1.0, group)?;
    convolution_average_with(&table, f, mu, m, n_samples, seed)
}

fn convolution_average_with(
    table: &OrbitTable,
    f: &BumpFunction,
    mu: &StepDistribution,
    m: u64,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    let failure = std::sync::Mutex::new(None);
    let est = sharded_mean(n_samples, seed, |rng: &mut ChaCha8Rng| {
        let t = mu.sample_sum(rng, m);
        match table.at(t) {
            Ok(p) => f.eval(&p),
            Err(e) => {
                *failure.lock().expect("not poisoned") = Some(e);
                0.0
            }
        }
    });
    match failure.into_inner().expect("not poisoned") {
        Some(e) => Err(e),
        None => Ok(est),
    }
}

/// One scheduled step count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub m: u64,
    pub t_n: f64,
    pub rho_n: f64,
    pub sigma_m: f64,
    pub cusp: CuspId,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WalkSchedule {
    pub entries: Vec<ScheduleEntry>,
}

impl WalkSchedule {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks `m = round(T_n / a)` and `b sqrt(m) < c / sqrt(rho_n)` for
    /// every entry.
    pub fn satisfies_conditions(&self, mu: &StepDistribution, c: f64) -> bool {
        let (a, b) = (mu.mean(), mu.std());
        self.entries.iter().all(|e| {
            e.m == (e.t_n / a).round() as u64
                && (e.sigma_m - b * (e.m as f64).sqrt()).abs() < 1e-12 * e.sigma_m.max(1.0)
                && e.sigma_m < c / e.rho_n.sqrt()
        })
    }
}

/// Picks step counts landing at the deepest point of cusp visits.
///
/// Visits are enumerated once at the largest level of `rho_seq`; each is
/// labelled with the smallest `rho_n` it reaches below, and kept when
/// `b sqrt(m) < SPREAD_CONSTANT / sqrt(rho_n)`. For `a < 0` the visits
/// come from negative times.
pub fn build_schedule(
    alpha: f64,
    mu: &StepDistribution,
    rho_seq: &[f64],
    t_max: f64,
) -> Result<WalkSchedule> {
    build_schedule_with(alpha, mu, rho_seq, t_max, SPREAD_CONSTANT)
}

/// [`build_schedule`] with an explicit spread constant.
pub fn build_schedule_with(
    alpha: f64,
    mu: &StepDistribution,
    rho_seq: &[f64],
    t_max: f64,
    c: f64,
) -> Result<WalkSchedule> {
    let mu = mu.clone().validated()?;
    if rho_seq.is_empty() || rho_seq.iter().any(|r| !(*r > 0.0 && *r < 2.0)) {
        return Err(Error::InvalidParameter(
            "rho_seq must be non-empty and inside (0, 2)".into(),
        ));
    }
    let (a, b) = (mu.mean(), mu.std());
    let rho_max = rho_seq.iter().cloned().fold(f64::MIN, f64::max);
    let events: Vec<ExcursionEvent> = if a > 0.0 {
        excursions_exact(alpha, rho_max, t_max)?
    } else {
        excursions_exact_backward(alpha, rho_max, t_max)?
    };
    let mut sorted = rho_seq.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut entries: Vec<ScheduleEntry> = events
        .iter()
        .filter(|e| e.cusp != CuspId::Infinity)
        .filter_map(|e| {
            let rho_n = *sorted.iter().find(|&&r| r > e.depth_rho)?;
            let t_n = e.t_deepest(alpha);
            let m = (t_n / a).round();
            if m < 1.0 {
                return None;
            }
            let sigma_m = b * m.sqrt();
            (sigma_m < c / rho_n.sqrt()).then_some(ScheduleEntry {
                m: m as u64,
                t_n,
                rho_n,
                sigma_m,
                cusp: e.cusp,
            })
        })
        .collect();
    entries.sort_by_key(|e| e.m);
    entries.dedup_by_key(|e| e.m);
    if entries.is_empty() {
        return Err(Error::EmptySchedule);
    }
    Ok(WalkSchedule { entries })
}

/// Walk average against Birkhoff average at one scheduled time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreuillardRow {
    pub m: u64,
    pub t_n: f64,
    pub rho_n: f64,
    pub walk_avg: f64,
    pub walk_stderr: f64,
    pub birkhoff_avg: f64,
}

/// Step used for the Birkhoff averages in [`breuillard_experiment`].
pub const BIRKHOFF_STEP: f64 = 0.01;

/// For each schedule entry, the walk average after `m` steps and the
/// Birkhoff average over `[0, T_n]` (or `[T_n, 0]` for negative drift).
#[allow(clippy::too_many_arguments)]
pub fn breuillard_experiment(
    x0: &ReducedPoint,
    f: &BumpFunction,
    mu: &StepDistribution,
    schedule: &WalkSchedule,
    n_samples: usize,
    seed: u64,
    group: FuchsianGroupSpec,
) -> Result<Vec<BreuillardRow>> {
    if schedule.is_empty() {
        return Ok(Vec::new());
    }
    let (a, b) = (mu.mean(), mu.std());
    let spread = |m: u64| 10.0 * b * (m as f64).sqrt() + 2.0;
    let (lo, hi) = schedule
        .entries
        .iter()
        .fold((0.0_f64, 0.0_f64), |(lo, hi), e| {
            let c = a * e.m as f64;
            (lo.min(c - spread(e.m)), hi.max(c + spread(e.m)))
        });
    let table = OrbitTable::new(x0, lo, hi, 1.0, group)?;

    // Birkhoff prefix averages along the drift direction, one sweep.
    let h = BIRKHOFF_STEP.copysign(a);
    let counts: Vec<usize> = schedule
        .entries
        .iter()
        .map(|e| ((e.t_n / h).round() as usize).max(1))
        .collect();
    let total = counts.iter().copied().max().unwrap_or(1);
    let mut prefix = vec![0.0; total + 1];
    let mut acc = 0.0;
    sweep_orbit(x0, h, total, group, |k, p| {
        acc += f.eval(p);
        prefix[k + 1] = acc;
    })?;

    schedule
        .entries
        .iter()
        .zip(&counts)
        .enumerate()
        .map(|(i, (e, &n))| {
            let walk = convolution_average_with(
                &table,
                f,
                mu,
                e.m,
                n_samples,
                seed.wrapping_add(i as u64),
            )?;
            Ok(BreuillardRow {
                m: e.m,
                t_n: e.t_n,
                rho_n: e.rho_n,
                walk_avg: walk.mean,
                walk_stderr: walk.stderr,
                birkhoff_avg: prefix[n] / n as f64,
            })
        })
        .collect()
}
