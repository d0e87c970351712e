use horoflow::cusp_dioph::{
    approximant_scan, cf_convergents, excursions_exact, horocycle_path, khinchin_count,
    region_classify, semiconvergents, AlphaSpec, CuspId, GrowthFn,
};
use horoflow::FuchsianGroupSpec;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

// every cusp with level < rho at z, by exhaustive search over a generous box
fn cusps_below(z: Complex64, rho: f64) -> Vec<CuspId> {
    let mut out = Vec::new();
    if 2.0 / z.im < rho {
        out.push(CuspId::Infinity);
    }
    let q_top = (rho / z.im).sqrt().ceil() as i64 + 2;
    for q in 1..=q_top {
        let c = (q as f64 * z.re).round() as i64;
        for p in c - 3..=c + 3 {
            if gcd(p, q) == 1 && 2.0 * (z * q as f64 - p as f64).norm_sqr() / z.im < rho {
                out.push(CuspId::Rational { p, q });
            }
        }
    }
    out
}

fn level(c: CuspId, z: Complex64) -> f64 {
    c.level(z)
}

#[test]
fn cusp_regions_at_level_two_are_disjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100_000 {
        let z = Complex64::new(
            rng.random_range(-2.0..2.0),
            10f64.powf(rng.random_range(-4.0..1.0)),
        );
        let hits = cusps_below(z, 2.0);
        assert!(hits.len() <= 1, "{z}: {hits:?}");
        let rho = rng.random_range(0.01..2.0);
        let expected = cusps_below(z, rho).first().copied();
        assert_eq!(
            region_classify(z, rho, FuchsianGroupSpec::Gamma2),
            expected,
            "{z} at {rho}"
        );
    }
}

proptest! {
    #[test]
    fn exact_visits_touch_the_level_at_their_ends(alpha in 0.01f64..1.0, rho in 0.05f64..1.9) {
        for e in excursions_exact(alpha, rho, 500.0).unwrap() {
            if e.cusp == CuspId::Infinity {
                continue;
            }
            let lv = |t: f64| level(e.cusp, horocycle_path(alpha, t));
            prop_assert!((lv(e.t_enter) - rho).abs() < 1e-8 * (1.0 + e.t_enter.powi(2)));
            // visits still open at the horizon are clipped there
            if e.t_exit < 500.0 {
                prop_assert!((lv(e.t_exit) - rho).abs() < 1e-8 * (1.0 + e.t_exit.powi(2)));
            }
            let t = e.t_deepest(alpha);
            prop_assert!((lv(t) - e.depth_rho).abs() < 1e-9);
            prop_assert_eq!(region_classify(horocycle_path(alpha, t), rho, FuchsianGroupSpec::Gamma2), Some(e.cusp));
        }
    }
}

#[test]
fn depth_determines_height_at_the_deepest_point() {
    let alpha = 2f64.sqrt() - 1.0;
    let events = excursions_exact(alpha, 1.0, 1e4).unwrap();
    let mut checked = 0;
    for e in events {
        let CuspId::Rational { q, .. } = e.cusp else {
            continue;
        };
        let q2 = (q as f64).powi(2);
        let y = horocycle_path(alpha, e.t_deepest(alpha)).im;
        let exact = e.depth_rho / (2.0 * q2) / (1.0 + e.depth_rho / (4.0 * q2));
        assert!((y - exact).abs() <= 1e-9 * exact);
        if q >= 4 {
            let approx = e.depth_rho / (2.0 * q2);
            assert!((y - approx).abs() < 0.01 * y, "q = {q}");
            checked += 1;
        }
    }
    assert!(checked >= 5);
}

fn as_i64(v: &[(num_bigint::BigInt, num_bigint::BigInt)]) -> Vec<(i64, i64)> {
    v.iter()
        .filter_map(|(p, q)| Some((p.to_i64()?, q.to_i64()?)))
        .collect()
}

#[test]
fn first_visits_are_semiconvergents() {
    let rho_seq: Vec<f64> = (1..=50).map(|n| 1.0 / n as f64).collect();
    for spec in [
        AlphaSpec::sqrt2(),
        AlphaSpec::golden(),
        AlphaSpec::pi_minus_3(),
    ] {
        let semis = as_i64(&semiconvergents(&spec, 25).unwrap());
        for a in approximant_scan(spec.value(), &rho_seq, 0.01).unwrap() {
            assert!(semis.contains(&(a.p, a.q)), "{spec}: {}/{}", a.p, a.q);
        }
    }
}

#[test]
fn golden_visits_follow_fibonacci() {
    let golden = AlphaSpec::golden();
    let rho_seq: Vec<f64> = (1..=50).map(|n| 1.0 / n as f64).collect();
    let mut fib = vec![1i64, 1];
    while fib.len() < 40 {
        fib.push(fib[fib.len() - 1] + fib[fib.len() - 2]);
    }
    let found = approximant_scan(golden.value(), &rho_seq, 0.01).unwrap();
    for a in &found {
        assert!(fib.contains(&a.q) && fib.contains(&a.p), "{}/{}", a.p, a.q);
    }
    assert!(found.iter().map(|a| a.q).max().unwrap() >= 5);
}

#[test]
fn best_approximations_meet_the_hurwitz_constant_infinitely_often() {
    let bound = 1.0 / 5f64.sqrt();
    for spec in [AlphaSpec::golden(), AlphaSpec::sqrt2()] {
        let alpha = spec.value();
        let hits = as_i64(&cf_convergents(&spec, 20).unwrap())
            .into_iter()
            .filter(|&(p, q)| {
                q >= 2 && (alpha - p as f64 / q as f64).abs() * (q as f64).powi(2) < bound
            })
            .count();
        assert!(hits >= 5, "{spec}: {hits}");
    }
}

// For q >= 8 the tolerance 1/(q^2 ln q) is below 1/(2 q^2), so only
// convergents can qualify; smaller q are checked exhaustively.
fn khinchin_oracle(spec: &AlphaSpec, q_max: i64) -> u64 {
    let alpha = spec.value();
    let ok = |p: i64, q: i64| {
        (alpha - p as f64 / q as f64).abs() < 1.0 / ((q as f64).powi(2) * (q as f64).ln())
    };
    let mut n = 0;
    for q in 2..8.min(q_max + 1) {
        let c = (alpha * q as f64).round() as i64;
        n += (c - 2..=c + 2)
            .filter(|&p| gcd(p, q) == 1 && ok(p, q))
            .count() as u64;
    }
    // a decimal input only pins down finitely many partial quotients
    let convs = (1..=40)
        .rev()
        .find_map(|n| cf_convergents(spec, n).ok())
        .unwrap();
    let convs = as_i64(&convs);
    n + convs
        .iter()
        .filter(|&&(p, q)| (8..=q_max).contains(&q) && ok(p, q))
        .count() as u64
}

#[test]
fn khinchin_counts_match_the_convergent_oracle() {
    let liouville: AlphaSpec = "0.110001000000000000000001".parse().unwrap();
    for spec in [AlphaSpec::golden(), AlphaSpec::sqrt2(), liouville.clone()] {
        for q_max in [50u64, 10_000] {
            let got = khinchin_count(spec.value(), GrowthFn::NLogN, q_max).unwrap();
            assert_eq!(
                got,
                khinchin_oracle(&spec, q_max as i64),
                "{spec} up to {q_max}"
            );
        }
    }
    let g = |q| khinchin_count(AlphaSpec::golden().value(), GrowthFn::NLogN, q).unwrap();
    assert_eq!(g(100), g(10_000));
    let l = |q| khinchin_count(liouville.value(), GrowthFn::NLogN, q).unwrap();
    assert!(l(10_000) > l(50));
}
