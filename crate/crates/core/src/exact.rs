//! Exact rational scalars and their textual forms.
//!
//! Accepted syntax: integers (`-3`), decimals (`0.47`, `2.5e-1`),
//! fractions of either (`10/9`), and integer powers (`18^2`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse {0:?} as an exact number")]
pub struct ParseExactError(pub String);

pub fn parse_exact(text: &str) -> Result<BigRational, ParseExactError> {
    let err = || ParseExactError(text.to_string());
    let s = text.trim();
    let mut parts = s.split('/');
    let num = parse_power(parts.next().ok_or_else(err)?).ok_or_else(err)?;
    let value = match parts.next() {
        None => num,
        Some(d) => {
            let den = parse_power(d).ok_or_else(err)?;
            if den.is_zero() {
                return Err(err());
            }
            num / den
        }
    };
    if parts.next().is_some() {
        return Err(err());
    }
    Ok(value)
}

fn parse_power(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('^') {
        None => parse_decimal(s),
        Some((base, exp)) => {
            let base = parse_decimal(base.trim())?;
            let exp: u32 = exp.trim().parse().ok()?;
            Some(Pow::pow(base, exp))
        }
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    if s.is_empty() {
        return None;
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut n: BigInt = all.parse().ok()?;
    if neg {
        n = -n;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(n * Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(n, Pow::pow(&ten, (-scale) as u32))
    })
}

/// The exact binary value of a finite float.
pub fn exact_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Reduced `p/q` (or `p` for integers).
pub fn canonical_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn is_positive(q: &BigRational) -> bool {
    q.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_supported_forms() {
        assert_eq!(parse_exact("10/9").unwrap(), q(10, 9));
        assert_eq!(parse_exact("-3").unwrap(), q(-3, 1));
        assert_eq!(parse_exact("0.47").unwrap(), q(47, 100));
        assert_eq!(parse_exact(".5").unwrap(), q(1, 2));
        assert_eq!(parse_exact("18^2").unwrap(), q(324, 1));
        assert_eq!(parse_exact("2.5e-1").unwrap(), q(1, 4));
        assert_eq!(parse_exact(" 45/99 ").unwrap(), q(5, 11));
        assert_eq!(parse_exact("1e3").unwrap(), q(1000, 1));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1/0", "1/2/3", "0e", "--1", "2^x", "."] {
            assert!(parse_exact(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn float_conversion_is_exact() {
        assert_eq!(exact_from_f64(0.5).unwrap(), q(1, 2));
        let third = exact_from_f64(1.0 / 3.0).unwrap();
        assert_ne!(third, q(1, 3));
        assert_eq!(to_f64(&third), 1.0 / 3.0);
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical_string(&q(6, 4)), "3/2");
        assert_eq!(canonical_string(&q(-8, 2)), "-4");
    }
}
