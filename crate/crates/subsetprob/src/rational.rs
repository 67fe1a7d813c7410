//! Exact rational scalars used for probability values and interval endpoints.
//!
//! Everything on the algebraic side of the crate is computed over arbitrary
//! precision rationals so that set operations, certainty tests, and lattice
//! derivations are exact. Floating point appears only in the simulator, where
//! relative frequencies are approximate by nature.

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Zero};

use crate::error::Error;
use crate::scan::Cursor;

/// Arbitrary precision rational number.
pub type Rational = Ratio<BigInt>;

/// `p/q` as a [`Rational`].
///
/// Panics if `q == 0`; intended for literals in code and tests.
pub fn ratio(p: i64, q: i64) -> Rational {
    Ratio::new(BigInt::from(p), BigInt::from(q))
}

/// The rational zero.
pub fn zero() -> Rational {
    Rational::zero()
}

/// The rational one.
pub fn one() -> Rational {
    Rational::one()
}

/// True if `x` lies in the closed unit interval.
pub fn in_unit_interval(x: &Rational) -> bool {
    !x.is_negative() && *x <= one()
}

use num::Signed;

/// Parse a rational written as a fraction (`3/5`), an integer (`2`), or a
/// decimal (`0.35`). Decimals are read exactly, so `0.1` is one tenth rather
/// than the nearest double. A leading `-` is accepted; range checks are left
/// to the caller.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let mut cur = Cursor::new(s);
    cur.skip_ws();
    let value = cur.rational()?;
    cur.finish()?;
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_exactly() {
        assert_eq!(parse_rational("3/5").unwrap(), ratio(3, 5));
        assert_eq!(parse_rational("10/20").unwrap(), ratio(1, 2));
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.1").unwrap(), ratio(1, 10));
        assert_eq!(parse_rational("0.35").unwrap(), ratio(7, 20));
        assert_eq!(parse_rational("1.0").unwrap(), one());
        assert_eq!(parse_rational("2").unwrap(), ratio(2, 1));
    }

    #[test]
    fn parses_signed_values() {
        assert_eq!(parse_rational("-1/4").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational(" -0.5 ").unwrap(), ratio(-1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5x").is_err());
        assert!(parse_rational("3//4").is_err());
        assert!(parse_rational(".5").is_err());
    }

    #[test]
    fn displays_reduced_form() {
        assert_eq!(ratio(10, 20).to_string(), "1/2");
        assert_eq!(ratio(4, 2).to_string(), "2");
        assert_eq!(ratio(7, 10).to_string(), "7/10");
    }

    #[test]
    fn unit_interval_check() {
        assert!(in_unit_interval(&zero()));
        assert!(in_unit_interval(&one()));
        assert!(in_unit_interval(&ratio(1, 2)));
        assert!(!in_unit_interval(&ratio(-1, 2)));
        assert!(!in_unit_interval(&ratio(3, 2)));
    }
}
