//! Exact rationals for `ε`, `δ` and the step-2 target `a`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::weight::Weight;

/// Parses `p/q`, a plain integer, or a finite decimal such as `0.25`,
/// exactly. Negative values are rejected; range checks belong to callers.
pub fn parse_fraction(s: &str) -> Result<BigRational> {
    let bad = || Error::BadFraction(s.to_string());
    let digits = |t: &str| -> Result<BigInt> {
        if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        BigInt::parse_bytes(t.as_bytes(), 10).ok_or_else(bad)
    };
    if let Some((p, q)) = s.split_once('/') {
        let (p, q) = (digits(p)?, digits(q)?);
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        let int = if int.is_empty() { BigInt::zero() } else { digits(int)? };
        let frac_val = if frac.is_empty() { BigInt::zero() } else { digits(frac)? };
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        return Ok(BigRational::new(int * &scale + frac_val, scale));
    }
    Ok(BigRational::from_integer(digits(s)?))
}

/// Canonical `p/q` rendering (`p` alone when the denominator is 1).
pub fn format_fraction(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_rational(w: &Weight) -> BigRational {
    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, w.as_biguint().clone()))
}

/// Integer value of `r` when it is a non-negative integer.
pub fn exact_integer(r: &BigRational) -> Option<BigUint> {
    (r.is_integer() && !r.is_negative()).then(|| r.numer().to_biguint().unwrap_or_default())
}

/// `⌊r⌋` for non-negative `r`.
pub fn floor_nonneg(r: &BigRational) -> Option<Weight> {
    if r.is_negative() {
        return None;
    }
    let (q, _) = r.numer().div_rem(r.denom());
    q.to_biguint().map(Weight::from_biguint)
}

/// `⌈r⌉` for non-negative `r`.
pub fn ceil_nonneg(r: &BigRational) -> Option<Weight> {
    if r.is_negative() {
        return None;
    }
    r.ceil().to_integer().to_biguint().map(Weight::from_biguint)
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses a comma-separated list of counts such as `1,5,19`. The empty
/// string is the empty list.
pub fn parse_count_list(s: &str) -> Result<Vec<usize>> {
    if s.is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            if t.is_empty() || t.len() > 19 || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::BadDecimal(t.to_string()));
            }
            t.parse::<usize>().map_err(|_| Error::BadDecimal(t.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn parses_the_three_forms() {
        assert_eq!(parse_fraction("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_fraction("2/10").unwrap(), q(1, 5));
        assert_eq!(parse_fraction("0.01").unwrap(), q(1, 100));
        assert_eq!(parse_fraction(".5").unwrap(), q(1, 2));
        assert_eq!(parse_fraction("3").unwrap(), q(3, 1));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "/", "1/0", "-1/2", "1/-2", "a/b", "1//2", ".", "1.2.3", "1/2/3", "1e-3"] {
            assert!(parse_fraction(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(floor_nonneg(&q(7, 2)).unwrap(), Weight::from(3));
        assert_eq!(ceil_nonneg(&q(7, 2)).unwrap(), Weight::from(4));
        assert_eq!(ceil_nonneg(&q(4, 1)).unwrap(), Weight::from(4));
        assert!(floor_nonneg(&q(-1, 2)).is_none());
    }

    #[test]
    fn count_lists() {
        assert_eq!(parse_count_list("1,5").unwrap(), vec![1, 5]);
        assert_eq!(parse_count_list(" 8, 16 ,24").unwrap(), vec![8, 16, 24]);
        assert!(parse_count_list("").unwrap().is_empty());
        for bad in [",", "1,,2", "-1", "1.5", "99999999999999999999"] {
            assert!(parse_count_list(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_fraction(&q(6, 4)), "3/2");
        assert_eq!(format_fraction(&q(4, 2)), "2");
    }
}
