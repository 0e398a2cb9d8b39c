//! Exact rational numbers used throughout the crate.
//!
//! Everything is arbitrary precision; there is no floating point anywhere.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Formats as `n` or `n/d`.
pub fn format(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Parses `n`, `-n`, `n/d` or a finite decimal such as `0.25`.
pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches('-');
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let whole_part: BigInt = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            whole_digits.parse().ok()?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().ok()?
        };
        let magnitude = Rational::new(whole_part * &scale + frac_part, scale);
        return Some(if negative { -magnitude } else { magnitude });
    }
    text.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Least common multiple of the denominators.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales a nonnegative rational vector to the primitive integral vector on the same ray.
pub fn to_primitive_integers(values: &[Rational]) -> Vec<BigInt> {
    let lcm = denominator_lcm(values);
    let scaled: Vec<BigInt> = values
        .iter()
        .map(|v| (v * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let gcd = scaled.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if gcd.is_zero() || gcd.is_one() {
        return scaled;
    }
    scaled.into_iter().map(|v| v / &gcd).collect()
}

pub fn is_nonnegative(value: &Rational) -> bool {
    !value.is_negative()
}

pub mod serde_string {
    //! Serializes a rational as its `n/d` string.
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&super::format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(deserializer)?;
        super::parse(&text).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{text}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse("3/6"), Some(ratio(1, 2)));
        assert_eq!(parse("-0.25"), Some(ratio(-1, 4)));
        assert_eq!(parse("2.0"), Some(int(2)));
        assert_eq!(parse("7"), Some(int(7)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("x"), None);
    }

    #[test]
    fn primitive_integer_scaling() {
        let v = [ratio(1, 2), ratio(1, 3), zero()];
        let ints = to_primitive_integers(&v);
        assert_eq!(ints, vec![BigInt::from(3), BigInt::from(2), BigInt::from(0)]);
        let v = [int(4), int(6)];
        assert_eq!(to_primitive_integers(&v), vec![BigInt::from(2), BigInt::from(3)]);
    }

    #[test]
    fn formatting() {
        assert_eq!(format(&ratio(6, 4)), "3/2");
        assert_eq!(format(&int(-5)), "-5");
    }
}
