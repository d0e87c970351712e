//! Randomized check of the matrix and flow identities.

use std::f64::consts::TAU;

use horoflow::flow_geometry::{alpha, alpha_prime, solve_commutation};
use horoflow::psl2::{angle_gap, phi, phi_inv};
use horoflow::{TangentPoint, UnimodularMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

pub struct Residual {
    pub name: &'static str,
    pub max: f64,
    pub tol: f64,
}

fn random_matrix(rng: &mut ChaCha8Rng) -> UnimodularMatrix {
    UnimodularMatrix::rotation(rng.random_range(0.0..TAU))
        * UnimodularMatrix::geodesic(rng.random_range(-2.0..2.0))
        * UnimodularMatrix::horocycle_pos(rng.random_range(-2.0..2.0))
}

// entrywise gap up to sign, relative to the entry scale
fn gap(m: &UnimodularMatrix, n: &UnimodularMatrix) -> f64 {
    let (e, f) = (m.entries(), n.entries());
    let same = e
        .iter()
        .zip(&f)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let flip = e
        .iter()
        .zip(&f)
        .map(|(x, y)| (x + y).abs())
        .fold(0.0, f64::max);
    same.min(flip) / m.max_abs_entry().max(n.max_abs_entry()).max(1.0)
}

fn point_gap(p: &TangentPoint, q: &TangentPoint) -> f64 {
    ((p.x - q.x).abs() / (1.0 + p.x.abs()))
        .max((p.y - q.y).abs() / p.y)
        .max(angle_gap(p.theta, q.theta))
}

pub fn run(n: usize, seed: u64) -> Result<Vec<Residual>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 7];
    for _ in 0..n {
        let (m, a, b) = (
            random_matrix(&mut rng),
            random_matrix(&mut rng),
            random_matrix(&mut rng),
        );
        worst[0] = worst[0].max(gap(&((m * a) * b), &(m * (a * b))));
        worst[1] = worst[1]
            .max(gap(&(m * m.inverse()), &UnimodularMatrix::IDENTITY))
            .max(((m * a).det() - 1.0).abs());

        let p = TangentPoint::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(0.2..5.0),
            rng.random_range(0.0..TAU),
        )?;
        worst[2] = worst[2]
            .max(point_gap(&phi(&(m * phi_inv(&p))), &m.tangent_apply(&p)))
            .max(point_gap(&phi(&phi_inv(&p)), &p));

        let (s, t): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-5.0..5.0));
        let g = UnimodularMatrix::geodesic;
        worst[3] = worst[3].max(gap(
            &(g(-s) * UnimodularMatrix::horocycle_pos(t) * g(s)),
            &UnimodularMatrix::horocycle_pos((-s).exp() * t),
        ));
        worst[4] = worst[4].max(gap(
            &(g(-s) * UnimodularMatrix::horocycle_neg(t) * g(s)),
            &UnimodularMatrix::horocycle_neg(s.exp() * t),
        ));

        let s: f64 = rng.random_range(-3.0..3.0);
        let rs: f64 = rng.random_range(-0.75..0.75);
        let r = if s.abs() < 1e-6 { 0.0 } else { rs / s };
        let t = rng.random_range(-2.0..2.0);
        let exact = alpha(r, t, s)?;
        worst[5] = worst[5].max((solve_commutation(r, t, s)?.alpha - exact).abs());
        let h = 1e-5 / (1.0 + r.abs());
        let fd = (alpha(r, t, s + h)? - alpha(r, t, s - h)?) / (2.0 * h);
        let d = alpha_prime(r, t, s)?;
        worst[6] = worst[6].max((fd - d).abs() / d.abs());
    }
    let names = [
        ("associativity", 1e-10),
        ("inverse and determinant", 1e-10),
        ("frame equivariance", 1e-10),
        ("geodesic conjugation of u+", 1e-10),
        ("geodesic conjugation of u-", 1e-10),
        ("crossing time: closed form vs solver", 1e-9),
        ("crossing time derivative (relative)", 1e-5),
    ];
    Ok(names
        .iter()
        .zip(worst)
        .map(|(&(name, tol), max)| Residual { name, max, tol })
        .collect())
}
