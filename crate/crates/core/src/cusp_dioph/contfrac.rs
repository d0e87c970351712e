//! Continued fractions of exactly specified reals.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decimal expansion of `pi - 3`, 100 places.
pub const PI_MINUS_3: &str = "0.1415926535897932384626433832795028841971693993751058209749445923078164062862089986280348253421170679";

/// A real number given exactly enough for continued-fraction work.
///
/// Text forms: `golden`, `sqrt2`, `pi-3`, `surd:P,D,Q` for `(P + sqrt D)/Q`,
/// `rat:P/Q`, and `dec:0.1234...` (or a bare decimal literal).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AlphaSpec {
    /// `(p + sqrt(d)) / q`.
    Surd { p: BigInt, d: BigInt, q: BigInt },
    /// `p / q`.
    Rational { p: BigInt, q: BigInt },
    /// `mantissa / 10^scale`, known to within one unit of the last place.
    Decimal { mantissa: BigInt, scale: u32 },
}

impl AlphaSpec {
    pub fn golden() -> Self {
        AlphaSpec::Surd {
            p: 1.into(),
            d: 5.into(),
            q: 2.into(),
        }
    }

    pub fn sqrt2() -> Self {
        AlphaSpec::Surd {
            p: 0.into(),
            d: 2.into(),
            q: 1.into(),
        }
    }

    pub fn pi_minus_3() -> Self {
        PI_MINUS_3.parse().expect("valid decimal constant")
    }

    pub fn surd(p: i64, d: i64, q: i64) -> Result<Self> {
        if d < 0 || q == 0 {
            return Err(Error::InvalidParameter(format!(
                "surd ({p} + sqrt {d})/{q} needs d >= 0 and q != 0"
            )));
        }
        Ok(AlphaSpec::Surd {
            p: p.into(),
            d: d.into(),
            q: q.into(),
        })
    }

    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        Ok(AlphaSpec::Rational {
            p: p.into(),
            q: q.into(),
        })
    }

    /// Nearest double.
    pub fn value(&self) -> f64 {
        match self {
            AlphaSpec::Surd { p, d, q } => {
                (p.to_f64().unwrap_or(f64::NAN) + d.to_f64().unwrap_or(f64::NAN).sqrt())
                    / q.to_f64().unwrap_or(f64::NAN)
            }
            AlphaSpec::Rational { p, q } => {
                p.to_f64().unwrap_or(f64::NAN) / q.to_f64().unwrap_or(f64::NAN)
            }
            AlphaSpec::Decimal { .. } => self.to_string().parse().unwrap_or(f64::NAN),
        }
    }

    /// True when the number is declared rational.
    pub fn is_rational(&self) -> bool {
        match self {
            AlphaSpec::Rational { .. } => true,
            AlphaSpec::Surd { d, .. } => {
                let s = d.sqrt();
                &s * &s == *d
            }
            AlphaSpec::Decimal { .. } => false,
        }
    }

    /// The first `n` partial quotients (fewer if the expansion terminates).
    pub fn partial_quotients(&self, n: usize) -> Result<Vec<BigInt>> {
        if n == 0 {
            return Err(Error::InvalidParameter("need n >= 1".into()));
        }
        match self {
            AlphaSpec::Rational { p, q } => Ok(euclid(p.clone(), q.clone(), n)),
            AlphaSpec::Surd { p, d, q } => {
                let s = d.sqrt();
                if &s * &s == *d {
                    return Ok(euclid(p + s, q.clone(), n));
                }
                Ok(surd_quotients(p, d, q, n))
            }
            AlphaSpec::Decimal { mantissa, scale } => {
                let den = BigInt::from(10).pow(*scale);
                decimal_quotients(mantissa - 1, mantissa + 1, den, n)
            }
        }
    }
}

fn euclid(mut num: BigInt, mut den: BigInt, n: usize) -> Vec<BigInt> {
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    let mut out = Vec::new();
    while out.len() < n && !den.is_zero() {
        let (a, r) = num.div_mod_floor(&den);
        out.push(a);
        num = den;
        den = r;
    }
    out
}

// Exact expansion of (m + sqrt d)/q for non-square d. After scaling so that
// q divides d - m^2, every complete quotient has the same shape.
fn surd_quotients(p: &BigInt, d: &BigInt, q: &BigInt, n: usize) -> Vec<BigInt> {
    let (mut m, mut d, mut q) = (p.clone(), d.clone(), q.clone());
    if !(&d - &m * &m).is_multiple_of(&q) {
        let aq = q.abs();
        m *= &aq;
        d *= &aq * &aq;
        q *= &aq;
    }
    let s = d.sqrt();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let a = if q.is_positive() {
            (&m + &s).div_floor(&q)
        } else {
            // (m + sqrt d) is not an integer, so floor(-y/|q|) = -floor(floor(y)/|q|) - 1
            -((&m + &s).div_floor(&-&q)) - 1
        };
        m = &a * &q - &m;
        q = (&d - &m * &m) / &q;
        out.push(a);
    }
    out
}

// Quotients shared by every number in [lo/den, hi/den].
fn decimal_quotients(lo: BigInt, hi: BigInt, den: BigInt, n: usize) -> Result<Vec<BigInt>> {
    let (mut a_num, mut b_num) = (lo, hi);
    let (mut a_den, mut b_den) = (den.clone(), den);
    let mut out = Vec::new();
    while out.len() < n {
        let (qa, ra) = a_num.div_mod_floor(&a_den);
        let (qb, rb) = b_num.div_mod_floor(&b_den);
        if qa != qb || ra.is_zero() || rb.is_zero() {
            return Err(Error::PrecisionExhausted { index: out.len() });
        }
        out.push(qa);
        a_num = std::mem::replace(&mut a_den, ra);
        b_num = std::mem::replace(&mut b_den, rb);
    }
    Ok(out)
}

impl FromStr for AlphaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse alpha `{s}`"));
        let int = |t: &str| t.trim().parse::<i64>().map_err(|_| bad());
        match s {
            "golden" => return Ok(AlphaSpec::golden()),
            "sqrt2" => return Ok(AlphaSpec::sqrt2()),
            "pi-3" => return Ok(AlphaSpec::pi_minus_3()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("surd:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            return AlphaSpec::surd(int(parts[0])?, int(parts[1])?, int(parts[2])?);
        }
        if let Some(rest) = s.strip_prefix("rat:") {
            let (p, q) = rest.split_once('/').ok_or_else(bad)?;
            return AlphaSpec::rational(int(p)?, int(q)?);
        }
        let lit = s.strip_prefix("dec:").unwrap_or(s);
        let (neg, body) = match lit.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, lit),
        };
        let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
        if whole.is_empty() && frac.is_empty()
            || !whole
                .chars()
                .chain(frac.chars())
                .all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let digits = format!("{whole}{frac}");
        let mut mantissa: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            mantissa = -mantissa;
        }
        Ok(AlphaSpec::Decimal {
            mantissa,
            scale: frac.len() as u32,
        })
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Surd { p, d, q } => write!(f, "surd:{p},{d},{q}"),
            AlphaSpec::Rational { p, q } => write!(f, "rat:{p}/{q}"),
            AlphaSpec::Decimal { mantissa, scale } => {
                let digits = mantissa.abs().to_string();
                let scale = *scale as usize;
                let padded = format!("{digits:0>width$}", width = scale + 1);
                let (whole, frac) = padded.split_at(padded.len() - scale);
                let sign = if mantissa.is_negative() { "-" } else { "" };
                if scale == 0 {
                    write!(f, "{sign}{whole}")
                } else {
                    write!(f, "{sign}{whole}.{frac}")
                }
            }
        }
    }
}

impl From<AlphaSpec> for String {
    fn from(a: AlphaSpec) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for AlphaSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Convergents `p_k / q_k` built from partial quotients.
pub fn convergents_from_quotients(quotients: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let (mut p0, mut p1) = (BigInt::zero(), BigInt::one());
    let (mut q0, mut q1) = (BigInt::one(), BigInt::zero());
    quotients
        .iter()
        .map(|a| {
            let p = a * &p1 + &p0;
            let q = a * &q1 + &q0;
            p0 = std::mem::replace(&mut p1, p.clone());
            q0 = std::mem::replace(&mut q1, q.clone());
            (p, q)
        })
        .collect()
}

/// The first `n` convergents of `alpha`.
pub fn cf_convergents(alpha: &AlphaSpec, n: usize) -> Result<Vec<(BigInt, BigInt)>> {
    Ok(convergents_from_quotients(&alpha.partial_quotients(n)?))
}

/// Convergents and intermediate fractions
/// `(p_{k-2} + j p_{k-1}) / (q_{k-2} + j q_{k-1})`, `1 <= j <= a_k`,
/// for the first `n` partial quotients.
pub fn semiconvergents(alpha: &AlphaSpec, n: usize) -> Result<Vec<(BigInt, BigInt)>> {
    let quotients = alpha.partial_quotients(n)?;
    let conv = convergents_from_quotients(&quotients);
    let mut out = vec![conv[0].clone()];
    for k in 1..quotients.len() {
        let (pm2, qm2) = if k >= 2 {
            conv[k - 2].clone()
        } else {
            (BigInt::one(), BigInt::zero())
        };
        let (pm1, qm1) = &conv[k - 1];
        let mut j = BigInt::one();
        while j <= quotients[k] {
            out.push((&pm2 + &j * pm1, &qm2 + &j * qm1));
            j += 1;
        }
    }
    Ok(out)
}
