use std::path::Path;
use std::process::{Command, Output};

use horoflow::cusp_dioph::AlphaSpec;
use horoflow::ergodic::{equidistribution_curve, generic_start, space_average, BumpFunction};
use horoflow::random_walk::{breuillard_experiment, build_schedule_with, StepDistribution};
use horoflow::{FuchsianGroupSpec, TangentPoint};
use serde_json::Value;

fn horoflow(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_horoflow"));
    cmd.args(args).env_remove("HOROFLOW_THREADS");
    if let Some(n) = threads {
        cmd.env("HOROFLOW_THREADS", n);
    }
    cmd.output().unwrap()
}

fn ok(args: &[&str]) -> Value {
    let out = horoflow(args, None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

const EQUIDIST: &[&str] = &[
    "equidist",
    "--seed",
    "11",
    "--T",
    "1e3",
    "--n_samples",
    "2e4",
    "--norm_samples",
    "2e4",
];

#[test]
fn same_seed_gives_identical_bytes_for_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in [Some("1"), Some("4"), None].into_iter().enumerate() {
        let (j, c) = (
            dir.path().join(format!("{i}.json")),
            dir.path().join(format!("{i}.csv")),
        );
        let mut args = EQUIDIST.to_vec();
        args.extend(["--json", j.to_str().unwrap(), "--csv", c.to_str().unwrap()]);
        assert!(horoflow(&args, threads).status.success());
        outputs.push((read(&j), read(&c)));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));

    let area = ["area", "--seed", "5", "--n_samples", "5e4"];
    assert_eq!(
        horoflow(&area, Some("1")).stdout,
        horoflow(&area, Some("3")).stdout
    );
}

#[test]
fn different_seeds_differ() {
    let a = ok(&["sample-space", "--seed", "1", "--n_samples", "1e4"]);
    let b = ok(&["sample-space", "--seed", "2", "--n_samples", "1e4"]);
    assert_ne!(a["outputs"]["mean"], b["outputs"]["mean"]);
}

fn failure(args: &[&str], threads: Option<&str>) -> (i32, Value) {
    let out = horoflow(args, threads);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    (out.status.code().unwrap(), err)
}

#[test]
fn exit_codes_follow_the_error_class() {
    let (code, err) = failure(&["area"], None);
    assert_eq!((code, err["error"].as_str()), (2, Some("config_invalid")));

    let (code, _) = failure(&["area", "--seed", "1"], Some("zero"));
    assert_eq!(code, 2);

    let (code, _) = failure(&["area", "--seed", "1", "--group", "gamma3"], None);
    assert_eq!(code, 2);

    let (code, err) = failure(&["flow", "--json", "/nonexistent-dir/out.json"], None);
    assert_eq!(
        (code, err["error"].as_str()),
        (2, Some("output_unwritable"))
    );

    // no excursion of the golden horocycle is deep enough for a unit-mean walk
    let walk = [
        "walk",
        "--seed",
        "1",
        "--n_samples",
        "100",
        "--norm_samples",
        "1e4",
    ];
    let (code, err) = failure(&walk, None);
    assert_eq!(
        (code, err["error"].as_str()),
        (3, Some("numerical_precondition"))
    );

    let (code, _) = failure(&["reduce", "--x", "0.3", "--y", "-1"], None);
    assert_eq!(code, 3);

    // a point this close to the boundary needs more steps than floating point can follow
    let (code, err) = failure(&["reduce", "--x", "0.3", "--y", "1e-300"], None);
    assert_eq!(
        (code, err["error"].as_str()),
        (4, Some("internal_invariant"))
    );
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# flow settings\nexperiment = flow\nT = 4\nsteps = 2\nkind = geodesic\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let v = ok(&["flow", "--config", cfg]);
    assert_eq!(v["inputs"]["T"], "4");
    assert_eq!(v["inputs"]["kind"], "geodesic");
    assert_eq!(
        v["outputs"]["final"][2]
            .as_str()
            .unwrap()
            .parse::<f64>()
            .unwrap(),
        4f64.exp()
    );

    let v = ok(&["flow", "--config", cfg, "--T", "1"]);
    assert_eq!(v["inputs"]["T"], "1");
    assert_eq!(v["inputs"]["steps"], "2");

    let (code, _) = failure(&["area", "--config", cfg, "--seed", "1"], None);
    assert_eq!(code, 2, "config written for another experiment");
}

#[test]
fn help_describes_each_experiment() {
    let out = horoflow(&["--help"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    for topic in [
        "verify-identities",
        "equidist",
        "walk",
        "dioph",
        "HOROFLOW_THREADS",
    ] {
        assert!(text.contains(topic), "{topic}");
    }
    let out = horoflow(&["walk", "--help"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("random walks") && text.contains("--Tmax"));
}

fn unit_bump(seed: u64, n: usize) -> BumpFunction {
    let c = TangentPoint::new(0.5, 3f64.sqrt() / 2.0, 1.0).unwrap();
    BumpFunction::new(&c, 0.2, 1.8, FuchsianGroupSpec::Gamma2)
        .unwrap()
        .normalized(n, seed)
        .unwrap()
}

fn csv_rows(bytes: &[u8]) -> Vec<Vec<f64>> {
    csv::Reader::from_reader(bytes)
        .records()
        .map(|r| {
            r.unwrap()
                .iter()
                .map(|s| s.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

#[test]
fn equidist_series_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("e.csv");
    let mut args = EQUIDIST.to_vec();
    args.extend(["--csv", c.to_str().unwrap()]);
    ok(&args);
    let rows = csv_rows(&read(&c));

    let g = FuchsianGroupSpec::Gamma2;
    let f = unit_bump(11, 20_000);
    let space = space_average(&f, 20_000, 12).unwrap();
    let x0 = generic_start("golden".parse::<AlphaSpec>().unwrap().value(), g).unwrap();
    let curve = equidistribution_curve(&x0, &f, &[100.0, 1000.0], 0.01, g, space).unwrap();
    assert_eq!(rows.len(), curve.len());
    for (row, r) in rows.iter().zip(&curve) {
        assert_eq!(row[..4], [r.t, r.time_avg, r.space_avg, r.mc_stderr]);
    }
}

#[test]
fn walk_rows_match_the_library() {
    // one excursion past 2/3 at depth ~1e-6 makes the schedule nonempty
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let alpha = 1.0 / (1.0 + 1.0 / (2.0 + 1.0 / (400.0 + 1.0 / phi)));
    let a = format!("{alpha:?}");
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("w.csv");
    let args = [
        "walk",
        "--seed",
        "4",
        "--alpha",
        &a,
        "--Tmax",
        "1e4",
        "--rho_seq",
        "dyadic:24",
        "--n_samples",
        "500",
        "--norm_samples",
        "2e4",
        "--csv",
        c.to_str().unwrap(),
    ];
    ok(&args);
    let rows = csv_rows(&read(&c));

    let g = FuchsianGroupSpec::Gamma2;
    let mu = StepDistribution::gaussian(1.0, 1.0).unwrap();
    let rho: Vec<f64> = (1..=24).map(|k| 0.5f64.powi(k)).collect();
    let schedule = build_schedule_with(alpha, &mu, &rho, 1e4, 0.1).unwrap();
    let f = unit_bump(4, 20_000);
    let x0 = generic_start(alpha, g).unwrap();
    let want = breuillard_experiment(&x0, &f, &mu, &schedule, 500, 5, g).unwrap();
    assert!(!want.is_empty());
    assert_eq!(rows.len(), want.len());
    for (row, w) in rows.iter().zip(&want) {
        assert_eq!(row[5..], [w.walk_avg, w.walk_stderr, w.birkhoff_avg]);
    }
}
