//! Number policy: exact big rationals for identities, binary64 for irrational
//! inputs and sampling. Algorithms are written once against [`Scalar`].

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Field elements the algorithms run over.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn from_int(k: i64) -> Self;

    /// Exact image of a binary64 value (the value itself for `f64`).
    fn from_f64_value(x: f64) -> Result<Self>;

    /// Nearest integer, ties resolved toward −∞.
    fn nearest_integer(&self) -> Self;

    fn floor_value(&self) -> Self;

    fn ceil_value(&self) -> Self;

    /// The value as `i64` when it is an integer in range.
    fn to_i64_exact(&self) -> Option<i64>;

    fn as_f64(&self) -> f64;

    /// Natural logarithm of `|self|`, robust to magnitudes beyond binary64.
    fn ln_abs(&self) -> f64;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(k: i64) -> Self {
        k as f64
    }

    fn from_f64_value(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Domain(format!("non-finite value {x}")))
        }
    }

    fn nearest_integer(&self) -> Self {
        (self - 0.5).ceil()
    }

    fn floor_value(&self) -> Self {
        self.floor()
    }

    fn ceil_value(&self) -> Self {
        self.ceil()
    }

    fn to_i64_exact(&self) -> Option<i64> {
        if self.fract() == 0.0 && self.abs() < 9.0e18 {
            Some(*self as i64)
        } else {
            None
        }
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn ln_abs(&self) -> f64 {
        self.abs().ln()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_int(k: i64) -> Self {
        Rational::from_integer(BigInt::from(k))
    }

    fn from_f64_value(x: f64) -> Result<Self> {
        Rational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite value {x}")))
    }

    fn nearest_integer(&self) -> Self {
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        (self - half).ceil()
    }

    fn floor_value(&self) -> Self {
        self.floor()
    }

    fn ceil_value(&self) -> Self {
        self.ceil()
    }

    fn to_i64_exact(&self) -> Option<i64> {
        if self.is_integer() {
            self.to_integer().to_i64()
        } else {
            None
        }
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        ln_bigint(self.numer()) - ln_bigint(self.denom())
    }
}

fn ln_bigint(x: &BigInt) -> f64 {
    let x = x.abs();
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::NAN).ln();
    }
    let shift = bits - 64;
    let top = (&x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Sup norm of a slice.
pub fn sup_norm<S: Scalar>(v: &[S]) -> S {
    v.iter().map(|c| c.abs()).fold(S::zero(), |m, c| if c > m { c } else { m })
}

/// Sup norm of an integer vector.
pub fn sup_norm_int(v: &[i64]) -> u64 {
    v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
}

/// Parses `"p/q"`, an integer, or a decimal such as `"-1.25e-3"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = |why: &str| Error::Domain(format!("cannot parse {text:?} as a rational: {why}"));
    if s.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad("exponent"))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad("no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad("unexpected character"));
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str_radix(if all.is_empty() { "0" } else { &all }, 10).map_err(|_| bad("digits"))?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -value } else { value })
}

/// Shorthand for the exact rational `p/q`.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}
