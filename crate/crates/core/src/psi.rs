//! The closed catalog of approximating functions.

use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};
use crate::scalar::parse_rational;

/// A positive non-increasing function on `[1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproximatingFunction {
    /// `k^{-tau}`
    Power { tau: Rational64 },
    /// `k^{-tau} (ln(k + e))^{-sigma}`
    PowerLog { tau: Rational64, sigma: Rational64 },
    /// `k^{-1}`
    Dirichlet,
}

impl ApproximatingFunction {
    pub fn power(tau: Rational64) -> Result<Self> {
        if tau.is_negative() {
            return Err(domain(format!("power exponent {tau} must be non-negative")));
        }
        Ok(Self::Power { tau })
    }

    pub fn power_log(tau: Rational64, sigma: Rational64) -> Result<Self> {
        if tau.is_negative() || sigma.is_negative() {
            return Err(domain("power-log parameters must be non-negative"));
        }
        Ok(Self::PowerLog { tau, sigma })
    }

    /// `psi(k)`; fails for `k < 1`.
    pub fn evaluate(&self, k: f64) -> Result<f64> {
        if !(k >= 1.0) || !k.is_finite() {
            return Err(domain(format!("psi is defined for k >= 1, got {k}")));
        }
        Ok(match *self {
            Self::Power { tau } => power(k, tau),
            Self::PowerLog { tau, sigma } => power(k, tau) * (k + std::f64::consts::E).ln().powf(-to_f64(sigma)),
            Self::Dirichlet => 1.0 / k,
        })
    }

    /// The lower order at infinity of `1/psi`.
    pub fn lower_order(&self) -> f64 {
        match *self {
            Self::Power { tau } | Self::PowerLog { tau, .. } => to_f64(tau),
            Self::Dirichlet => 1.0,
        }
    }

    /// Parses `power:1.5`, `powerlog:1:2` or `dirichlet`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut parts = spec.trim().split(':');
        let family = parts.next().unwrap_or_default().to_ascii_lowercase();
        let params: Vec<&str> = parts.collect();
        Self::from_parts(&family, &params)
    }

    /// Builds from a family name and textual rational parameters.
    pub fn from_parts(family: &str, params: &[&str]) -> Result<Self> {
        let rat = |s: &str| -> Result<Rational64> {
            let r = parse_rational(s)?;
            match (r.numer().to_i64(), r.denom().to_i64()) {
                (Some(p), Some(q)) => Ok(Rational64::new(p, q)),
                _ => Err(domain(format!("parameter {s} does not fit a 64-bit rational"))),
            }
        };
        match (family.to_ascii_lowercase().as_str(), params) {
            ("power", [tau]) => Self::power(rat(tau)?),
            ("powerlog" | "power_log" | "power-log", [tau, sigma]) => Self::power_log(rat(tau)?, rat(sigma)?),
            ("dirichlet", []) => Ok(Self::Dirichlet),
            _ => Err(domain(format!(
                "unknown psi {family:?} with {} parameter(s); expected power:TAU, powerlog:TAU:SIGMA or dirichlet",
                params.len()
            ))),
        }
    }
}

impl fmt::Display for ApproximatingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power { tau } => write!(f, "power:{tau}"),
            Self::PowerLog { tau, sigma } => write!(f, "powerlog:{tau}:{sigma}"),
            Self::Dirichlet => write!(f, "dirichlet"),
        }
    }
}

fn to_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn power(k: f64, tau: Rational64) -> f64 {
    if tau.is_zero() {
        1.0
    } else if tau.is_integer() {
        k.powi(-(*tau.numer() as i32))
    } else {
        k.powf(-to_f64(tau))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_values() {
        let p1 = ApproximatingFunction::power(Rational64::new(1, 1)).unwrap();
        assert_eq!(p1.evaluate(4.0).unwrap(), 0.25);
        assert_eq!(ApproximatingFunction::Dirichlet.evaluate(10.0).unwrap(), 0.1);
        let p32 = ApproximatingFunction::power(Rational64::new(3, 2)).unwrap();
        assert_eq!(p32.evaluate(4.0).unwrap(), 0.125);
    }

    #[test]
    fn rejects_small_arguments_and_bad_parameters() {
        assert!(ApproximatingFunction::Dirichlet.evaluate(0.5).is_err());
        assert!(ApproximatingFunction::Dirichlet.evaluate(f64::NAN).is_err());
        assert!(ApproximatingFunction::power(Rational64::new(-1, 2)).is_err());
    }

    #[test]
    fn parses_specs() {
        assert_eq!(
            ApproximatingFunction::parse("power:1.5").unwrap(),
            ApproximatingFunction::Power { tau: Rational64::new(3, 2) }
        );
        assert_eq!(
            ApproximatingFunction::parse("powerlog:1:2").unwrap(),
            ApproximatingFunction::PowerLog { tau: Rational64::new(1, 1), sigma: Rational64::new(2, 1) }
        );
        assert_eq!(ApproximatingFunction::parse("dirichlet").unwrap(), ApproximatingFunction::Dirichlet);
        assert!(ApproximatingFunction::parse("gauss:1").is_err());
        let p = ApproximatingFunction::parse("power:3/2").unwrap();
        assert_eq!(ApproximatingFunction::parse(&p.to_string()).unwrap(), p);
    }
}
