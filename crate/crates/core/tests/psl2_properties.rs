use horoflow::psl2::{dist, flow, hyperbolic_distance, phi, phi_inv};
use horoflow::{FlowKind, TangentPoint, UnimodularMatrix};
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = UnimodularMatrix> {
    (0.3f64..3.0, -3.0f64..3.0, -3.0f64..3.0, any::<bool>()).prop_map(|(a, b, c, flip)| {
        let a = if flip { -a } else { a };
        UnimodularMatrix::new(a, b, c, (1.0 + b * c) / a).unwrap()
    })
}

fn point() -> impl Strategy<Value = TangentPoint> {
    (-3.0f64..3.0, 0.1f64..5.0, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(x, y, t)| TangentPoint::new(x, y, t).unwrap())
}

fn kind() -> impl Strategy<Value = FlowKind> {
    prop::sample::select(FlowKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn composition_stays_unimodular_and_canonical(m in matrix(), n in matrix()) {
        let p = m * n;
        prop_assert!((p.det() - 1.0).abs() < 1e-12);
        let first = p.entries().into_iter().find(|v| *v != 0.0).unwrap();
        prop_assert!(first > 0.0);
    }

    #[test]
    fn associativity_and_inverse(m in matrix(), n in matrix(), k in matrix()) {
        let scale = m.max_abs_entry() * n.max_abs_entry() * k.max_abs_entry();
        // renormalizing by sqrt(det) costs about eps * |entries|^2
        prop_assert!(((m * n) * k).approx_eq(&(m * (n * k)), 1e-13 * scale.max(1.0).powi(2)));
        prop_assert!((m * m.inverse()).approx_eq(&UnimodularMatrix::IDENTITY, 1e-12 * m.max_abs_entry().powi(2)));
    }

    #[test]
    fn phi_is_equivariant(m in matrix(), p in point()) {
        let lhs = phi(&(m * phi_inv(&p)));
        let rhs = m.tangent_apply(&p);
        prop_assert!(dist(&lhs, &rhs) < 1e-9);
        prop_assert!(phi(&phi_inv(&p)).approx_eq(&p, 1e-12));
    }

    #[test]
    fn flows_are_one_parameter_groups(p in point(), k in kind(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let twice = flow(&flow(&p, k, s), k, t);
        prop_assert!(dist(&twice, &flow(&p, k, s + t)) < 1e-9);
    }

    #[test]
    fn flows_commute_with_the_left_action(m in matrix(), p in point(), k in kind(), t in -2.0f64..2.0) {
        let a = m.tangent_apply(&flow(&p, k, t));
        let b = flow(&m.tangent_apply(&p), k, t);
        prop_assert!(dist(&a, &b) < 1e-8);
    }

    #[test]
    fn conjugation_speeds_up_the_horocycle(s in -3.0f64..3.0, t in -5.0f64..5.0) {
        let lhs = UnimodularMatrix::geodesic(-s) * UnimodularMatrix::horocycle_pos(t) * UnimodularMatrix::geodesic(s);
        prop_assert!(lhs.approx_eq(&UnimodularMatrix::horocycle_pos((-s).exp() * t), 1e-12 * (1.0 + t.abs())));
        let lhs = UnimodularMatrix::geodesic(-s) * UnimodularMatrix::horocycle_neg(t) * UnimodularMatrix::geodesic(s);
        prop_assert!(lhs.approx_eq(&UnimodularMatrix::horocycle_neg(s.exp() * t), 1e-12 * (1.0 + t.abs()) * s.exp()));
    }

    #[test]
    fn distance_is_left_invariant_and_symmetric(m in matrix(), p in point(), q in point()) {
        let d = dist(&p, &q);
        prop_assert!((d - dist(&q, &p)).abs() < 1e-9 * (1.0 + d));
        let moved = dist(&m.tangent_apply(&p), &m.tangent_apply(&q));
        prop_assert!((d - moved).abs() < 1e-8 * (1.0 + d));
    }

    #[test]
    fn moebius_preserves_hyperbolic_distance(m in matrix(), p in point(), q in point()) {
        let d = hyperbolic_distance(p.z(), q.z());
        let moved = hyperbolic_distance(m.moebius_apply(p.z()).unwrap(), m.moebius_apply(q.z()).unwrap());
        prop_assert!((d - moved).abs() < 1e-9 * (1.0 + d));
    }
}

#[test]
fn geodesic_flow_moves_up_the_imaginary_axis() {
    let p = flow(&TangentPoint::base(), FlowKind::Geodesic, 1.5);
    assert!((p.y - 1.5f64.exp()).abs() < 1e-12);
    assert!(p.x.abs() < 1e-12);
    assert!((hyperbolic_distance(p.z(), TangentPoint::base().z()) - 1.5).abs() < 1e-12);
}
