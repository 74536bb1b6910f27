//! Arbitrary-precision rational scalars.
//!
//! Backed by `num_rational::BigRational`, which keeps values in lowest terms
//! with a positive denominator. Helpers here cover the constructions the rest
//! of the crate needs: literals, `p/q` parsing, and exact rational powers.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Exact rational scalar; always in lowest terms, denominator positive.
pub type Rational = num_rational::BigRational;

/// `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d` as a rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p"` or `"p/q"` with optional sign, rejecting anything else.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::InvalidJob(format!("expected a rational `p` or `p/q`, got `{s}`"));
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (t, None),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = match den {
        Some(d) => d.parse().map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(Error::InvalidJob(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(n, d))
}

/// Exact `base^exp` for rational `exp`, when the result is rational.
///
/// Requires `base > 0`. Returns `None` when the needed integer root does not
/// exist (e.g. `2^(1/2)`), so callers can restrict themselves to exactly
/// representable cases.
pub fn pow_rational(base: &Rational, exp: &Rational) -> Option<Rational> {
    if !base.is_positive() {
        return None;
    }
    if exp.is_zero() {
        return Some(Rational::one());
    }
    let q: u32 = exp.denom().try_into().ok()?;
    let root_n = exact_root(base.numer(), q)?;
    let root_d = exact_root(base.denom(), q)?;
    let root = Rational::new(root_n, root_d);
    let p = exp.numer();
    let p_abs: u32 = p.abs().try_into().ok()?;
    let mut acc = Rational::one();
    for _ in 0..p_abs {
        acc *= &root;
    }
    if p.is_negative() {
        acc = acc.recip();
    }
    Some(acc)
}

/// Exact `q`-th root of a non-negative integer, if it exists.
fn exact_root(n: &BigInt, q: u32) -> Option<BigInt> {
    if q == 1 {
        return Some(n.clone());
    }
    let r = n.nth_root(q);
    if r.pow(q) == *n {
        Some(r)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_positive_denominator() {
        let r = rat(4, -6);
        assert_eq!(r.numer(), &BigInt::from(-2));
        assert_eq!(r.denom(), &BigInt::from(3));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("-7").unwrap(), int(-7));
        assert_eq!(parse_rational(" 1/3 ").unwrap(), rat(1, 3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1.5").is_err());
    }

    #[test]
    fn rational_powers() {
        assert_eq!(pow_rational(&int(4), &rat(1, 2)), Some(int(2)));
        assert_eq!(pow_rational(&int(4), &rat(3, 2)), Some(int(8)));
        assert_eq!(pow_rational(&int(4), &rat(-1, 2)), Some(rat(1, 2)));
        assert_eq!(pow_rational(&int(2), &rat(1, 2)), None);
        assert_eq!(pow_rational(&int(9), &int(0)), Some(int(1)));
    }
}
