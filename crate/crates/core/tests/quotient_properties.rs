use horoflow::cusp_dioph::horocycle_start;
use horoflow::ergodic::{generic_start, sweep_orbit};
use horoflow::psl2::{dist, flow, phi_inv};
use horoflow::quotient::{in_fundamental_domain, quotient_dist, reduce};
use horoflow::{FlowKind, FuchsianGroupSpec, TangentPoint, UnimodularMatrix};
use proptest::prelude::*;

fn group() -> impl Strategy<Value = FuchsianGroupSpec> {
    prop::sample::select(vec![FuchsianGroupSpec::Modular, FuchsianGroupSpec::Gamma2])
}

fn point() -> impl Strategy<Value = TangentPoint> {
    (-20.0f64..20.0, 0.01f64..10.0, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(x, y, t)| TangentPoint::new(x, y, t).unwrap())
}

// Random words in the side pairings.
fn word(group: FuchsianGroupSpec, letters: &[u8]) -> UnimodularMatrix {
    let gens = group.generators();
    letters.iter().fold(UnimodularMatrix::IDENTITY, |acc, &l| {
        let g = gens[(l as usize / 2) % gens.len()];
        acc * if l % 2 == 0 { g } else { g.inverse() }
    })
}

proptest! {
    #[test]
    fn reduction_lands_in_the_domain_and_records_the_deck(g in group(), p in point()) {
        let r = reduce(&p, g).unwrap();
        prop_assert!(in_fundamental_domain(r.point.z(), g));
        let back = r.deck.tangent_apply(&r.point);
        prop_assert!(dist(&back, &p) < 1e-7);
        let again = reduce(&r.point, g).unwrap();
        prop_assert!(again.point.approx_eq(&r.point, 1e-12));
    }

    #[test]
    fn reduction_is_constant_on_orbits(g in group(), p in point(), letters in prop::collection::vec(0u8..4, 1..6)) {
        let gamma = word(g, &letters);
        let q = gamma.tangent_apply(&p);
        let (a, b) = (reduce(&p, g).unwrap(), reduce(&q, g).unwrap());
        // boundary points may land on either paired side
        prop_assert!(quotient_dist(&a, &b, g) < 1e-6);
    }
}

#[test]
fn reduced_orbit_tracks_the_direct_flow() {
    let g = FuchsianGroupSpec::Gamma2;
    let alpha = 0.5 * (1.0 + 5f64.sqrt());
    let x0 = generic_start(alpha, g).unwrap();
    let h = 0.01;
    let n = 100_000;
    let mut last = x0.point;
    sweep_orbit(&x0, h, n, g, |_, p| last = *p).unwrap();
    let t = (n as f64 - 0.5) * h;
    let direct = reduce(&flow(&horocycle_start(alpha), FlowKind::HorocyclePos, t), g).unwrap();
    let swept = reduce(&last, g).unwrap();
    let d = quotient_dist(&swept, &direct, g);
    // per-step rounding grows polynomially along a parabolic flow
    assert!(d < 1e-5, "distance {d}");
}

#[test]
fn unreduced_products_grow_linearly() {
    // the long product without reduction reaches entries of order T
    let x0 = horocycle_start(0.5 * (1.0 + 5f64.sqrt()));
    let m = phi_inv(&x0) * UnimodularMatrix::horocycle_pos(1e4);
    assert!(m.max_abs_entry() > 1e3);
}
