//! The subcommands: their keys, help text and runners.

use horoflow::cusp_dioph::{
    approximant_scan, cf_convergents, excursions_exact, excursions_exact_backward, khinchin_count,
    semiconvergents, GrowthFn,
};
use horoflow::ergodic::{
    equidistribution_curve, expected_core_fraction, generic_start, line_excursion_ratio,
    occupancy_fraction, space_average, space_average_domain, BumpFunction,
};
use horoflow::psl2::flow;
use horoflow::quotient::{covolume, cusp_region_area, monte_carlo_area, reduce, AreaRegion};
use horoflow::random_walk::{breuillard_experiment, build_schedule_with};
use horoflow::TangentPoint;
use serde_json::{json, Value};

use crate::config::{parse_group, Key, Params};
use crate::error::CliError;
use crate::output::{num, Report, Table};
use crate::verify;

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    pub run: fn(&Params) -> Result<Report, CliError>,
}

const fn key(name: &'static str, default: Option<&'static str>, help: &'static str) -> Key {
    Key {
        name,
        default,
        help,
    }
}

const SEED: Key = key("seed", None, "RNG seed (required)");
const GROUP: Key = key("group", Some("gamma2"), "modular or gamma2");
const ALPHA: Key = key(
    "alpha",
    Some("golden"),
    "tangency point of the lifted horocycle: golden, sqrt2, pi-3, surd:P,D,Q, rat:P/Q or a decimal",
);
const CENTER_X: Key = key("center_x", Some("0.5"), "bump center, real part");
const CENTER_Y: Key = key(
    "center_y",
    Some("0.8660254037844386"),
    "bump center, imaginary part",
);
const CENTER_THETA: Key = key("center_theta", Some("1"), "bump center, direction angle");
const RADIUS: Key = key("radius", Some("0.2"), "bump radius");
const RHO_SUPPORT: Key = key(
    "rho_support",
    Some("1.8"),
    "every cusp level on the bump support stays above this",
);
const NORM_SAMPLES: Key = key(
    "norm_samples",
    Some("1e6"),
    "samples used to normalize the bump to unit integral",
);

pub static EXPERIMENTS: &[Experiment] = &[
    Experiment {
        name: "verify-identities",
        about: "Group laws in SL(2,R), equivariance of the frame map, conjugation of horocycle flows by the geodesic flow, and the unstable-rectangle crossing time",
        keys: &[key("n_samples", Some("1e4"), "random samples per identity"), SEED],
        run: run_verify,
    },
    Experiment {
        name: "flow",
        about: "Orbit samples of the geodesic or horocycle flows acting by right multiplication",
        keys: &[
            key("x", Some("0"), "start point, real part"),
            key("y", Some("1"), "start point, imaginary part"),
            key("theta", Some("1.5707963267948966"), "start direction angle"),
            key("kind", Some("horocycle_pos"), "geodesic, horocycle_pos or horocycle_neg"),
            key("T", Some("10"), "final time"),
            key("steps", Some("10"), "number of intervals"),
            key("group", Some("none"), "reduce samples into this group's fundamental domain: none, modular or gamma2"),
        ],
        run: run_flow,
    },
    Experiment {
        name: "reduce",
        about: "Reduction of a unit tangent vector into the fundamental domain of the modular group or its level-2 congruence subgroup",
        keys: &[
            key("x", None, "real part"),
            key("y", None, "imaginary part"),
            key("theta", Some("1.5707963267948966"), "direction angle"),
            GROUP,
        ],
        run: run_reduce,
    },
    Experiment {
        name: "area",
        about: "Monte Carlo hyperbolic area of the surface and of its cusp neighbourhoods",
        keys: &[GROUP, key("n_samples", Some("1e6"), "samples per estimate"), key("rho", Some("0.25,0.5,1"), "cusp levels"), SEED],
        run: run_area,
    },
    Experiment {
        name: "equidist",
        about: "Equidistribution of a non-periodic horocycle: Birkhoff averages of a smooth bump against its Haar integral",
        keys: &[
            GROUP,
            ALPHA,
            key("T", Some("1e5"), "final time; checkpoints at each power of ten below it"),
            key("T_list", None, "explicit increasing checkpoints, overriding T"),
            key("h", Some("0.01"), "midpoint quadrature step"),
            CENTER_X,
            CENTER_Y,
            CENTER_THETA,
            RADIUS,
            RHO_SUPPORT,
            NORM_SAMPLES,
            key("n_samples", Some("1e6"), "samples for the Haar integral"),
            SEED,
        ],
        run: run_equidist,
    },
    Experiment {
        name: "occupancy",
        about: "Time a horocycle orbit spends outside the cusp neighbourhoods, and cusp excursions of a horizontal line near the real axis",
        keys: &[
            GROUP,
            ALPHA,
            key("rho", Some("0.25,0.5"), "cusp levels"),
            key("T", Some("1e5"), "final time"),
            key("h", Some("0.01"), "sampling step"),
            key("eps", Some("1e-4"), "height of the horizontal line"),
        ],
        run: run_occupancy,
    },
    Experiment {
        name: "excursions",
        about: "Visits of a lifted horocycle to Ford discs: cusp, entry and exit times, depth",
        keys: &[
            ALPHA,
            key("rho", Some("0.5"), "cusp level"),
            key("T", Some("1000"), "time horizon"),
            key("direction", Some("forward"), "forward or backward in time"),
        ],
        run: run_excursions,
    },
    Experiment {
        name: "dioph",
        about: "Rational approximations read off from cusp excursions, compared with continued-fraction convergents and the constant pi/3",
        keys: &[
            ALPHA,
            key("rho_seq", Some("harmonic:50"), "decreasing levels: harmonic:N, dyadic:K or a list"),
            key("eps", Some("0.01"), "slack in the error and time bounds"),
            key("quotients", Some("25"), "partial quotients used for the convergent comparison"),
            key("q_max", Some("1e4"), "denominator limit for the q log q approximation count"),
        ],
        run: run_dioph,
    },
    Experiment {
        name: "walk",
        about: "Uncentered random walks along a horocycle: step counts landing deep in a cusp, walk averages against Birkhoff averages",
        keys: &[
            GROUP,
            ALPHA,
            key("mu", Some("gaussian:1,1"), "step law: gaussian:a,b, exp:rate,shift, point:at or empirical:v1,v2,..."),
            key("Tmax", Some("1e5"), "time horizon for the schedule"),
            key("rho_seq", Some("harmonic:1000"), "levels labelling the visits"),
            key("c", Some("0.1"), "spread constant in b sqrt(m) < c / sqrt(rho)"),
            CENTER_X,
            CENTER_Y,
            CENTER_THETA,
            RADIUS,
            RHO_SUPPORT,
            NORM_SAMPLES,
            key("n_samples", Some("2e4"), "walk samples per scheduled step count"),
            SEED,
        ],
        run: run_walk,
    },
    Experiment {
        name: "sample-space",
        about: "Haar integral of a smooth bump on the unit tangent bundle by Monte Carlo",
        keys: &[
            GROUP,
            CENTER_X,
            CENTER_Y,
            CENTER_THETA,
            RADIUS,
            RHO_SUPPORT,
            key("n_samples", Some("1e6"), "samples"),
            key("method", Some("box"), "box (support neighbourhood) or domain (whole fundamental domain)"),
            SEED,
        ],
        run: run_sample_space,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

fn bump(p: &Params) -> Result<BumpFunction, CliError> {
    let center = TangentPoint::new(
        p.f64("center_x")?,
        p.f64("center_y")?,
        p.f64("center_theta")?,
    )?;
    Ok(BumpFunction::new(
        &center,
        p.f64("radius")?,
        p.f64("rho_support")?,
        p.group()?,
    )?)
}

fn unit_bump(p: &Params) -> Result<BumpFunction, CliError> {
    Ok(bump(p)?.normalized(p.usize("norm_samples")?, p.count("seed")?)?)
}

fn run_verify(p: &Params) -> Result<Report, CliError> {
    let rows = verify::run(p.usize("n_samples")?, p.count("seed")?)?;
    let summary = rows
        .iter()
        .map(|r| {
            let tag = if r.max <= r.tol { "ok" } else { "EXCEEDED" };
            format!("{:<40} {:>10.3e}  tol {:.0e}  {tag}", r.name, r.max, r.tol)
        })
        .collect();
    let outputs = rows
        .iter()
        .map(|r| json!({"identity": r.name, "max_residual": r.max, "tolerance": r.tol, "within": r.max <= r.tol}))
        .collect();
    Ok(Report {
        outputs: Value::Array(outputs),
        table: None,
        summary,
    })
}

fn run_flow(p: &Params) -> Result<Report, CliError> {
    let start = TangentPoint::new(p.f64("x")?, p.f64("y")?, p.f64("theta")?)?;
    let kind = p.flow_kind()?;
    let (t_end, steps) = (p.f64("T")?, p.usize("steps")?.max(1));
    let group = match p.str("group")? {
        "none" => None,
        g => Some(parse_group(g)?),
    };
    let mut table = Table::new(&["t", "x", "y", "theta"]);
    for k in 0..=steps {
        let t = t_end * k as f64 / steps as f64;
        let mut q = flow(&start, kind, t);
        if let Some(g) = group {
            q = reduce(&q, g)?.point;
        }
        table.push(vec![num(t), num(q.x), num(q.y), num(q.theta)]);
    }
    let last = table.rows.last().cloned().unwrap_or_default();
    Ok(Report {
        outputs: json!({"samples": table.rows.len(), "final": last}),
        summary: vec![format!(
            "{} samples, final point {}",
            table.rows.len(),
            last.join(" ")
        )],
        table: Some(table),
    })
}

fn run_reduce(p: &Params) -> Result<Report, CliError> {
    let q = TangentPoint::new(p.f64("x")?, p.f64("y")?, p.f64("theta")?)?;
    let r = reduce(&q, p.group()?)?;
    let deck = r.deck.entries();
    Ok(Report {
        outputs: json!({
            "point": {"x": r.point.x, "y": r.point.y, "theta": r.point.theta},
            "deck": deck,
        }),
        table: None,
        summary: vec![
            format!(
                "reduced: x {} y {} theta {}",
                num(r.point.x),
                num(r.point.y),
                num(r.point.theta)
            ),
            format!("deck: [{}]", deck.map(num).join(", ")),
        ],
    })
}

fn run_area(p: &Params) -> Result<Report, CliError> {
    let (g, n, seed) = (p.group()?, p.usize("n_samples")?, p.count("seed")?);
    let vol = monte_carlo_area(g, AreaRegion::Surface, n, seed)?;
    let mut table = Table::new(&["region", "rho", "estimate", "stderr", "exact"]);
    table.push(vec![
        "surface".into(),
        String::new(),
        num(vol.mean),
        num(vol.stderr),
        num(covolume(g)),
    ]);
    for (i, rho) in p.f64_list("rho")?.into_iter().enumerate() {
        let est = monte_carlo_area(
            g,
            AreaRegion::Cusps { rho },
            n,
            seed.wrapping_add(i as u64 + 1),
        )?;
        table.push(vec![
            "cusps".into(),
            num(rho),
            num(est.mean),
            num(est.stderr),
            num(cusp_region_area(g, rho)?),
        ]);
    }
    let summary = table.rows.iter().map(|r| r.join(" ")).collect();
    Ok(Report {
        outputs: json!({"rows": table.rows}),
        table: Some(table),
        summary,
    })
}

fn checkpoints(p: &Params) -> Result<Vec<f64>, CliError> {
    if p.has("T_list") {
        return p.f64_list("T_list");
    }
    let t = p.f64("T")?;
    let mut out: Vec<f64> = (2..)
        .map(|k| 10f64.powi(k))
        .take_while(|&v| v < t)
        .collect();
    out.push(t);
    Ok(out)
}

fn run_equidist(p: &Params) -> Result<Report, CliError> {
    let g = p.group()?;
    let f = unit_bump(p)?;
    let space = space_average(&f, p.usize("n_samples")?, p.count("seed")?.wrapping_add(1))?;
    let x0 = generic_start(p.alpha()?.value(), g)?;
    let curve = equidistribution_curve(&x0, &f, &checkpoints(p)?, p.f64("h")?, g, space)?;
    let mut table = Table::new(&["T", "time_avg", "space_avg", "mc_stderr", "relative_gap"]);
    for r in &curve {
        table.push(vec![
            num(r.t),
            num(r.time_avg),
            num(r.space_avg),
            num(r.mc_stderr),
            num(r.relative_gap()),
        ]);
    }
    let summary = curve
        .iter()
        .map(|r| {
            format!(
                "T {:>10}  time {:.5}  space {:.5}  gap {:.4}",
                num(r.t),
                r.time_avg,
                r.space_avg,
                r.relative_gap()
            )
        })
        .collect();
    Ok(Report {
        outputs: json!({"normalization": f.normalization, "curve": curve}),
        table: Some(table),
        summary,
    })
}

fn run_occupancy(p: &Params) -> Result<Report, CliError> {
    let g = p.group()?;
    let x0 = generic_start(p.alpha()?.value(), g)?;
    let (t, h, eps) = (p.f64("T")?, p.f64("h")?, p.f64("eps")?);
    let mut table = Table::new(&[
        "rho",
        "core_fraction",
        "expected",
        "line_ratio",
        "line_limit",
    ]);
    for rho in p.f64_list("rho")? {
        let got = occupancy_fraction(&x0, rho, t, h, g)?;
        let want = expected_core_fraction(g, rho)?;
        let ratio = line_excursion_ratio(rho, eps)?;
        let limit = rho.sqrt() / (2f64.sqrt() - rho.sqrt());
        table.push(vec![num(rho), num(got), num(want), num(ratio), num(limit)]);
    }
    let summary = table.rows.iter().map(|r| r.join(" ")).collect();
    Ok(Report {
        outputs: json!({"rows": table.rows}),
        table: Some(table),
        summary,
    })
}

fn run_excursions(p: &Params) -> Result<Report, CliError> {
    let alpha = p.alpha()?.value();
    let (rho, t) = (p.f64("rho")?, p.f64("T")?);
    let events = match p.str("direction")? {
        "forward" => excursions_exact(alpha, rho, t)?,
        "backward" => excursions_exact_backward(alpha, rho, t)?,
        other => {
            return Err(CliError::config(format!(
                "direction = {other}: expected forward or backward"
            )))
        }
    };
    let mut table = Table::new(&["t_enter", "t_exit", "cusp", "depth_rho", "t_deepest"]);
    for e in &events {
        table.push(vec![
            num(e.t_enter),
            num(e.t_exit),
            e.cusp.to_string(),
            num(e.depth_rho),
            num(e.t_deepest(alpha)),
        ]);
    }
    Ok(Report {
        outputs: json!({"events": events}),
        summary: vec![format!(
            "{} visits at level {rho} up to T = {t}",
            events.len()
        )],
        table: Some(table),
    })
}

fn run_dioph(p: &Params) -> Result<Report, CliError> {
    let spec = p.alpha()?;
    let alpha = spec.value();
    let eps = p.f64("eps")?;
    let n = p.usize("quotients")?;
    let pairs = |v: Vec<(num_bigint::BigInt, num_bigint::BigInt)>| -> Vec<(String, String)> {
        v.into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    };
    let convergents = pairs(cf_convergents(&spec, n)?);
    let semis = pairs(semiconvergents(&spec, n)?);
    let found = approximant_scan(alpha, &p.rho_seq()?, eps)?;
    let mut table = Table::new(&[
        "rho",
        "p",
        "q",
        "err",
        "scaled_err",
        "err_bound_ok",
        "t_found",
        "t_bound",
        "time_bound_ok",
        "convergent",
        "semiconvergent",
    ]);
    for a in &found {
        let key = (a.p.to_string(), a.q.to_string());
        let err_ok = a.err < (1.0 + eps) * std::f64::consts::PI / (3.0 * (a.q as f64).powi(2));
        table.push(vec![
            num(a.rho),
            a.p.to_string(),
            a.q.to_string(),
            num(a.err),
            num(a.scaled_err()),
            err_ok.to_string(),
            num(a.t_found),
            num(a.t_bound),
            a.within_time_bound().to_string(),
            convergents.contains(&key).to_string(),
            semis.contains(&key).to_string(),
        ]);
    }
    let count = |col: usize| table.rows.iter().filter(|r| r[col] == "true").count();
    let khinchin = khinchin_count(alpha, GrowthFn::NLogN, p.count("q_max")?)?;
    let summary = vec![
        format!("{} approximants", found.len()),
        format!(
            "error bound held {} times, time bound {} times",
            count(5),
            count(8)
        ),
        format!("convergents {}, semiconvergents {}", count(9), count(10)),
        format!("|alpha - p/q| < 1/(q^2 log q) for {khinchin} fractions"),
    ];
    Ok(Report {
        outputs: json!({
            "approximants": found,
            "convergents": convergents,
            "khinchin_count": khinchin,
        }),
        table: Some(table),
        summary,
    })
}

fn run_walk(p: &Params) -> Result<Report, CliError> {
    let g = p.group()?;
    let alpha = p.alpha()?.value();
    let mu = p.mu()?;
    let schedule = build_schedule_with(alpha, &mu, &p.rho_seq()?, p.f64("Tmax")?, p.f64("c")?)?;
    let f = unit_bump(p)?;
    let x0 = generic_start(alpha, g)?;
    let rows = breuillard_experiment(
        &x0,
        &f,
        &mu,
        &schedule,
        p.usize("n_samples")?,
        p.count("seed")?.wrapping_add(1),
        g,
    )?;
    let mut table = Table::new(&[
        "m",
        "t_n",
        "rho_n",
        "sigma_m",
        "cusp",
        "walk_avg",
        "walk_stderr",
        "birkhoff_avg",
    ]);
    for (e, r) in schedule.entries.iter().zip(&rows) {
        table.push(vec![
            e.m.to_string(),
            num(e.t_n),
            num(e.rho_n),
            num(e.sigma_m),
            e.cusp.to_string(),
            num(r.walk_avg),
            num(r.walk_stderr),
            num(r.birkhoff_avg),
        ]);
    }
    let min = rows
        .iter()
        .map(|r| r.walk_avg)
        .fold(f64::INFINITY, f64::min);
    Ok(Report {
        outputs: json!({"schedule": schedule.entries, "rows": rows, "min_walk_avg": min}),
        summary: vec![format!(
            "{} scheduled step counts, smallest walk average {min:.5}",
            rows.len()
        )],
        table: Some(table),
    })
}

fn run_sample_space(p: &Params) -> Result<Report, CliError> {
    let f = bump(p)?;
    let (n, seed) = (p.usize("n_samples")?, p.count("seed")?);
    let est = match p.str("method")? {
        "box" => space_average(&f, n, seed)?,
        "domain" => space_average_domain(&f, n, seed)?,
        other => {
            return Err(CliError::config(format!(
                "method = {other}: expected box or domain"
            )))
        }
    };
    Ok(Report {
        outputs: json!({"mean": est.mean, "stderr": est.stderr}),
        table: None,
        summary: vec![format!("integral {:.6e} +- {:.2e}", est.mean, est.stderr)],
    })
}
