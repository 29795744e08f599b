//! Exact rationals and their textual form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{GrappaError, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parses `"p/q"` (with `q > 0`) or a plain integer.
pub fn parse_q(s: &str) -> Result<Q> {
    let bad = || GrappaError::MalformedRational(s.to_string());
    let int = |t: &str| -> Result<BigInt> {
        let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        t.parse::<BigInt>().map_err(|_| bad())
    };
    match s.split_once('/') {
        None => Ok(Q::from_integer(int(s)?)),
        Some((n, d)) => {
            if d.starts_with(['-', '+']) {
                return Err(bad());
            }
            let d = int(d)?;
            if !d.is_positive() {
                return Err(bad());
            }
            Ok(Q::new(int(n)?, d))
        }
    }
}

/// Canonical `"p/q"` form, always with an explicit denominator.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn pow(x: &Q, k: usize) -> Q {
    let mut r = one();
    for _ in 0..k {
        r *= x;
    }
    r
}

pub fn factorial(k: usize) -> Q {
    let mut r = one();
    for i in 2..=k {
        r *= q(i as i64);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_q("1/2").unwrap(), qf(1, 2));
        assert_eq!(parse_q("-4/6").unwrap(), qf(-2, 3));
        assert_eq!(parse_q("7").unwrap(), q(7));
        assert_eq!(parse_q("0/1").unwrap(), zero());
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1/0", "1/-2", "a", "1/", "/2", "1.5", "--1", "1/2/3", " 1"] {
            assert!(parse_q(s).is_err(), "{s}");
        }
    }

    #[test]
    fn formats_with_denominator() {
        assert_eq!(fmt_q(&q(-1)), "-1/1");
        assert_eq!(fmt_q(&qf(3, 6)), "1/2");
    }
}
