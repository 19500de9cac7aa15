//! Scalar abstraction shared by the probability tables and the simplex.
//!
//! Floating types compare with small tolerances; exact types (big rationals)
//! use zero tolerance everywhere, so a verdict computed over `BigRational`
//! carries no rounding slack at all.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like numeric type usable for behaviors and linear feasibility.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Magnitude below which a pivot candidate is treated as zero.
    fn pivot_epsilon() -> Self;

    /// Slack allowed when checking that an entry lies in `[0, 1]`.
    fn entry_tolerance() -> Self;

    /// Slack allowed when checking that a conditional distribution sums to one.
    fn normalization_tolerance() -> Self;

    /// Lossy conversion used for reporting.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).unwrap_or_else(Self::zero)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn pivot_epsilon() -> Self {
        1e-12
    }

    fn entry_tolerance() -> Self {
        1e-12
    }

    fn normalization_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn pivot_epsilon() -> Self {
        1e-6
    }

    fn entry_tolerance() -> Self {
        1e-6
    }

    fn normalization_tolerance() -> Self {
        1e-5
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn pivot_epsilon() -> Self {
        Self::from_integer(BigInt::from(0))
    }

    fn entry_tolerance() -> Self {
        Self::from_integer(BigInt::from(0))
    }

    fn normalization_tolerance() -> Self {
        Self::from_integer(BigInt::from(0))
    }
}

/// `|a - b| <= tol`.
pub fn approx_eq<T: Scalar>(a: &T, b: &T, tol: &T) -> bool {
    (a.clone() - b.clone()).abs() <= *tol
}

/// Parses a plain decimal literal (`"0.25"`, `"-1e-3"`, `"3"`) into an exact
/// rational.
pub fn parse_decimal(literal: &str) -> Option<BigRational> {
    let literal = literal.trim();
    let (mantissa, exponent) = match literal.find(['e', 'E']) {
        Some(pos) => (&literal[..pos], literal[pos + 1..].parse::<i32>().ok()?),
        None => (literal, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Exact rational equal to the shortest decimal that round-trips `value`.
///
/// `0.1_f64` maps to `1/10`, not to the binary fraction stored in the float.
pub fn shortest_decimal_rational(value: f64) -> Option<BigRational> {
    if !value.is_finite() {
        return None;
    }
    parse_decimal(&format!("{value}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_plain_decimals() {
        assert_eq!(parse_decimal("0.25"), Some(ratio(1, 4)));
        assert_eq!(parse_decimal("-1.5"), Some(ratio(-3, 2)));
        assert_eq!(parse_decimal("3"), Some(ratio(3, 1)));
        assert_eq!(parse_decimal("1e-3"), Some(ratio(1, 1000)));
        assert_eq!(parse_decimal("2.5E2"), Some(ratio(250, 1)));
        assert_eq!(parse_decimal(".5"), Some(ratio(1, 2)));
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse_decimal(""), None);
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal("0x10"), None);
        assert_eq!(parse_decimal("1.2.3"), None);
    }

    #[test]
    fn shortest_decimal_is_not_binary_expansion() {
        assert_eq!(shortest_decimal_rational(0.1), Some(ratio(1, 10)));
        assert_eq!(shortest_decimal_rational(f64::NAN), None);
    }

    #[test]
    fn exact_tolerances_are_zero() {
        assert_eq!((BigRational::EXACT, f64::EXACT), (true, false));
        assert_eq!(BigRational::normalization_tolerance(), ratio(0, 1));
    }
}
