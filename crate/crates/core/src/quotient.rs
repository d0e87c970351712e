//! Fundamental-domain reduction for PSL(2,Z) and the level-2 congruence
//! subgroup, plus the measure geometry of the two quotient surfaces.
//!
//! Domains:
//! - `Modular`: `|Re z| <= 1/2`, `|z| >= 1`.
//! - `Gamma2`: the ideal quadrilateral `|Re z| <= 1`, `|z -+ 1/2| >= 1/2`
//!   with cusps at `-1, 0, 1, inf`. Cusp classes are `{inf}`, `{0}` and
//!   `{-1, 1}`, each of width 2: `z -> z + 2` fixes `inf`, `z -> z/(2z+1)`
//!   fixes `0` (conjugate by `z -> -1/z` to `z -> z - 2`), and
//!   `z -> (-z + 2)/(-2z + 3)`, the conjugate of `z -> z + 2` by
//!   `z -> (z - 1)/z`, fixes `1`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psl2::{dist, TangentPoint, UnimodularMatrix};
use crate::sampling::{sharded_mean, McEstimate};

/// Boundary tolerance for domain membership.
pub const DOMAIN_TOL: f64 = 1e-9;
/// Step budget for [`reduce`].
pub const REDUCTION_BUDGET: usize = 10_000;

// Strict tolerance inside the reduction loop, so that reduced points are
// fixed points of the loop.
const LOOP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FuchsianGroupSpec {
    Modular,
    Gamma2,
}

impl FuchsianGroupSpec {
    /// Half-width of the domain's real-part range.
    pub fn half_width(self) -> f64 {
        match self {
            FuchsianGroupSpec::Modular => 0.5,
            FuchsianGroupSpec::Gamma2 => 1.0,
        }
    }

    /// Side-pairing generators (without inverses).
    pub fn generators(self) -> Vec<UnimodularMatrix> {
        match self {
            FuchsianGroupSpec::Modular => vec![int_matrix([1, 1, 0, 1]), int_matrix([0, -1, 1, 0])],
            FuchsianGroupSpec::Gamma2 => vec![int_matrix([1, 2, 0, 1]), int_matrix([1, 0, 2, 1])],
        }
    }

    /// Identity, generators and inverses, and all their products of length
    /// two, deduplicated.
    pub fn short_words(self) -> Vec<UnimodularMatrix> {
        let mut letters = Vec::new();
        for g in self.generators() {
            letters.push(g);
            let inv = g.inverse();
            if !inv.approx_eq(&g, 1e-12) {
                letters.push(inv);
            }
        }
        let mut words = vec![UnimodularMatrix::IDENTITY];
        let mut push = |m: UnimodularMatrix| {
            if !words.iter().any(|w| w.approx_eq(&m, 1e-9)) {
                words.push(m);
            }
        };
        for a in &letters {
            push(*a);
        }
        for a in &letters {
            for b in &letters {
                push(a.compose(b));
            }
        }
        words
    }
}

impl fmt::Display for FuchsianGroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FuchsianGroupSpec::Modular => "modular",
            FuchsianGroupSpec::Gamma2 => "gamma2",
        })
    }
}

impl FromStr for FuchsianGroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "modular" => Ok(FuchsianGroupSpec::Modular),
            "gamma2" => Ok(FuchsianGroupSpec::Gamma2),
            other => Err(Error::InvalidParameter(format!("unknown group '{other}'"))),
        }
    }
}

fn int_matrix(e: [i64; 4]) -> UnimodularMatrix {
    UnimodularMatrix::new(e[0] as f64, e[1] as f64, e[2] as f64, e[3] as f64)
        .expect("integer generator has determinant one")
}

/// A point of the fundamental domain together with the deck transformation
/// carrying it back to the original input.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedPoint {
    pub point: TangentPoint,
    pub deck: UnimodularMatrix,
}

pub fn in_fundamental_domain(z: Complex64, group: FuchsianGroupSpec) -> bool {
    if !(z.im > 0.0) {
        return false;
    }
    match group {
        FuchsianGroupSpec::Modular => {
            z.re.abs() <= 0.5 + DOMAIN_TOL && z.norm() >= 1.0 - DOMAIN_TOL
        }
        FuchsianGroupSpec::Gamma2 => {
            z.re.abs() <= 1.0 + DOMAIN_TOL
                && (z - 0.5).norm() >= 0.5 - DOMAIN_TOL
                && (z + 0.5).norm() >= 0.5 - DOMAIN_TOL
        }
    }
}

// Integer 2x2 matrix product kept in f64; exact while entries stay below 2^53.
fn mat_mul(m: [f64; 4], n: [f64; 4]) -> [f64; 4] {
    [
        m[0] * n[0] + m[1] * n[2],
        m[0] * n[1] + m[1] * n[3],
        m[2] * n[0] + m[3] * n[2],
        m[2] * n[1] + m[3] * n[3],
    ]
}

/// Moves `p` into the fundamental domain of `group`.
///
/// Modular: translate `Re z` into `[-1/2, 1/2]`, invert `z -> -1/z` while
/// `|z| < 1`. Gamma2: translate by multiples of 2 into `[-1, 1]`, and while
/// inside `|z -+ 1/2| < 1/2` apply the power of `z -> z/(-+2z + 1)` that
/// brings `Re(-1/z)` into `[-1, 1]`. Each inversion strictly increases
/// `Im z`.
pub fn reduce(p: &TangentPoint, group: FuchsianGroupSpec) -> Result<ReducedPoint> {
    let mut cur = *p;
    // Accumulated g with cur = g . p.
    let mut g = [1.0, 0.0, 0.0, 1.0];
    let half = group.half_width();
    for _ in 0..REDUCTION_BUDGET {
        let z = cur.z();
        let step: Option<[f64; 4]> = if z.re.abs() > half + LOOP_TOL {
            let n = match group {
                FuchsianGroupSpec::Modular => z.re.round(),
                FuchsianGroupSpec::Gamma2 => 2.0 * (0.5 * z.re).round(),
            };
            Some([1.0, -n, 0.0, 1.0])
        } else {
            match group {
                FuchsianGroupSpec::Modular => {
                    (z.norm_sqr() < 1.0 - LOOP_TOL).then_some([0.0, -1.0, 1.0, 0.0])
                }
                FuchsianGroupSpec::Gamma2 => {
                    let inside = (z - 0.5).norm_sqr() < 0.25 - LOOP_TOL
                        || (z + 0.5).norm_sqr() < 0.25 - LOOP_TOL;
                    // z -> z/(-2n z + 1) shifts w = -1/z by 2n; take the
                    // whole shift at once so deep points near 0 reduce fast
                    inside.then(|| {
                        let n = (-0.5 * (-z.inv()).re).round();
                        [1.0, 0.0, -2.0 * n, 1.0]
                    })
                }
            }
        };
        match step {
            None => {
                let deck = UnimodularMatrix::new(g[3], -g[1], -g[2], g[0])?;
                return Ok(ReducedPoint { point: cur, deck });
            }
            Some(s) => {
                let m = UnimodularMatrix::new(s[0], s[1], s[2], s[3])?;
                cur = m.tangent_apply(&cur);
                g = mat_mul(s, g);
                if !cur.y.is_finite() || cur.y <= 0.0 {
                    break;
                }
            }
        }
    }
    Err(Error::NonTermination {
        steps: REDUCTION_BUDGET,
    })
}

/// Upper bound on the quotient distance: the minimum of the product-metric
/// proxy over the translates `gamma . q` for the short words of the group.
pub fn quotient_dist(p: &ReducedPoint, q: &ReducedPoint, group: FuchsianGroupSpec) -> f64 {
    group
        .short_words()
        .iter()
        .map(|w| dist(&p.point, &w.tangent_apply(&q.point)))
        .fold(f64::INFINITY, f64::min)
}

/// Hyperbolic area of the quotient surface.
pub fn covolume(group: FuchsianGroupSpec) -> f64 {
    match group {
        FuchsianGroupSpec::Modular => PI / 3.0,
        FuchsianGroupSpec::Gamma2 => 2.0 * PI,
    }
}

/// Number of cusps of the quotient surface.
pub fn cusp_count(group: FuchsianGroupSpec) -> usize {
    match group {
        FuchsianGroupSpec::Modular => 1,
        FuchsianGroupSpec::Gamma2 => 3,
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "rho = {rho} outside (0, 2]"
        )))
    }
}

/// Area of the cusp region, the set lifting to `Im z > 2/rho` and the discs
/// `|qz - p|^2 < (rho/2) Im z`.
///
/// Every cusp of Gamma2 has width 2, so each contributes `rho`. The modular
/// surface is covered six times by the Gamma2 surface and its single cusp
/// region is the image of all three, hence `3 rho / 6`.
pub fn cusp_region_area(group: FuchsianGroupSpec, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(match group {
        FuchsianGroupSpec::Modular => 0.5 * rho,
        FuchsianGroupSpec::Gamma2 => 3.0 * rho,
    })
}

/// Total Haar mass of the unit tangent bundle before normalization
/// (area times the `2 pi` fibre).
pub fn bundle_volume(group: FuchsianGroupSpec) -> f64 {
    covolume(group) * 2.0 * PI
}

/// Uniform sampler for `dx dy / y^2` on the fundamental domain.
///
/// Draws `x` uniformly on the domain's real range and `u = 1/y` uniformly on
/// `(0, u_max]`, which is inverse-transform sampling of the `1/y^2` density
/// and covers the cusp at infinity without truncation. For Gamma2 the
/// domain touches the real axis at the cusps `-1, 0, 1`; those are cut off
/// along the horocycles `|z - c|^2 < kappa y` with `kappa = rho_cut / 2`,
/// whose tails have exactly known area (`rho_cut` per cusp class).
#[derive(Clone, Copy, Debug)]
pub struct DomainSampler {
    group: FuchsianGroupSpec,
    kappa: f64,
    u_max: f64,
}

impl DomainSampler {
    pub fn new(group: FuchsianGroupSpec, rho_cut: f64) -> Result<Self> {
        check_rho(rho_cut)?;
        let kappa = 0.5 * rho_cut;
        let u_max = match group {
            FuchsianGroupSpec::Modular => 2.0 / 3.0_f64.sqrt(),
            // The truncated domain has y >= kappa / (1 + kappa^2).
            FuchsianGroupSpec::Gamma2 => (1.0 + kappa * kappa) / kappa * 1.01,
        };
        Ok(DomainSampler {
            group,
            kappa,
            u_max,
        })
    }

    /// Measure of the `(x, u)` proposal box.
    pub fn box_area(&self) -> f64 {
        2.0 * self.group.half_width() * self.u_max
    }

    /// Exact area of the excluded real-cusp tails.
    pub fn tail_area(&self) -> f64 {
        match self.group {
            FuchsianGroupSpec::Modular => 0.0,
            FuchsianGroupSpec::Gamma2 => 4.0 * self.kappa,
        }
    }

    pub fn in_real_cusp_tail(&self, z: Complex64) -> bool {
        match self.group {
            FuchsianGroupSpec::Modular => false,
            FuchsianGroupSpec::Gamma2 => [-1.0, 0.0, 1.0]
                .iter()
                .any(|c| (z - c).norm_sqr() < self.kappa * z.im),
        }
    }

    /// One proposal; `Some(z)` when it lands in the truncated domain.
    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Complex64> {
        let w = self.group.half_width();
        let x = rng.random_range(-w..w);
        let u = self.u_max * (1.0 - rng.random::<f64>());
        let z = Complex64::new(x, u.recip());
        (in_fundamental_domain(z, self.group) && !self.in_real_cusp_tail(z)).then_some(z)
    }
}

/// Which region a Monte Carlo area estimate measures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AreaRegion {
    /// The whole surface.
    Surface,
    /// The cusp region at level `rho`.
    Cusps { rho: f64 },
}

/// Monte Carlo area of `region` under `dx dy / y^2`.
pub fn monte_carlo_area(
    group: FuchsianGroupSpec,
    region: AreaRegion,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let (sampler, rho) = match region {
        AreaRegion::Surface => (DomainSampler::new(group, 0.5)?, None),
        AreaRegion::Cusps { rho } => {
            check_rho(rho)?;
            (DomainSampler::new(group, 0.5 * rho)?, Some(rho))
        }
    };
    let box_area = sampler.box_area();
    let est = sharded_mean(n_samples, seed, |rng| match sampler.propose(rng) {
        Some(z) => {
            let hit = match rho {
                None => true,
                Some(rho) => crate::cusp_dioph::region_classify(z, rho, group).is_some(),
            };
            if hit {
                box_area
            } else {
                0.0
            }
        }
        None => 0.0,
    });
    Ok(McEstimate {
        mean: est.mean + sampler.tail_area(),
        stderr: est.stderr,
    })
}
