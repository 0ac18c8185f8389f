//! Exact rational helpers shared by every module.
//!
//! Values and prices are `BigRational`s. Hot loops (the circulation solver and
//! the hypercube checkers) rescale a whole instance to a common denominator and
//! run on machine integers; the helpers for that live here as well.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Arbitrary-precision exact rational.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{literal}`: {reason}")]
pub struct ParseRationalError {
    pub literal: String,
    pub reason: &'static str,
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"a"`, `"-a"` or `"a/b"` with integer `a`, nonzero integer `b`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        literal: text.to_string(),
        reason,
    };
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(err("empty"));
    }
    let (numer, denom) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let numer: BigInt = numer
        .parse()
        .map_err(|_| err("numerator is not an integer"))?;
    let denom: BigInt = denom
        .parse()
        .map_err(|_| err("denominator is not an integer"))?;
    if denom.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(numer, denom))
}

/// Canonical text form: `"a"` for integers, `"a/b"` otherwise (b > 0, reduced).
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Display adaptor using [`format_rational`].
pub struct Exact<'a>(pub &'a Rational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.0))
    }
}

/// Least common multiple of all denominators (1 for an empty input).
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// `value * scale` as an `i128`, when `scale` clears the denominator and the
/// result fits.
pub fn scaled_i128(value: &Rational, scale: &BigInt) -> Option<i128> {
    let scaled = value * Rational::from_integer(scale.clone());
    if !scaled.is_integer() {
        return None;
    }
    scaled.to_integer().to_i128()
}

/// `value * scale` as an `i64` whose magnitude stays below `limit`.
pub fn scaled_i64(value: &Rational, scale: &BigInt, limit: i64) -> Option<i64> {
    let v = scaled_i128(value, scale)?;
    if v.unsigned_abs() >= limit.unsigned_abs() as u128 {
        return None;
    }
    Some(v as i64)
}

pub fn from_scaled(value: i128, scale: &BigInt) -> Rational {
    Rational::new(BigInt::from(value), scale.clone())
}

pub fn is_integral(value: &Rational) -> bool {
    value.is_integer()
}

pub fn abs(value: &Rational) -> Rational {
    value.abs()
}
