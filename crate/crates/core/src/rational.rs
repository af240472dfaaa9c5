//! Exact rational helpers for the enumeration oracles.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

pub type Rational = BigRational;

/// Converts `x` through its shortest round-trip decimal form, so `0.1` maps
/// to `1/10` rather than the nearest dyadic fraction.
pub fn from_f64(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    parse(&format!("{x}")).ok()
}

/// Parses `"p/q"`, an integer, or a decimal with optional exponent.
pub fn parse(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || {
        invalid(
            "number",
            format!("cannot parse {text:?} as an exact number"),
        )
    };
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(invalid("number", format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn integer(k: i64) -> Rational {
    Rational::from_integer(BigInt::from(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_forms() {
        assert_eq!(parse("0.1").unwrap(), Rational::new(1.into(), 10.into()));
        assert_eq!(parse("2").unwrap(), integer(2));
        assert_eq!(
            parse("-1.25e1").unwrap(),
            Rational::new((-25).into(), 2.into())
        );
        assert_eq!(parse("3/6").unwrap(), Rational::new(1.into(), 2.into()));
        assert_eq!(parse("1e-3").unwrap(), Rational::new(1.into(), 1000.into()));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse(".").is_err());
    }

    #[test]
    fn floats_map_to_shortest_decimal() {
        assert_eq!(from_f64(0.1).unwrap(), Rational::new(1.into(), 10.into()));
        assert_eq!(from_f64(1.0 / 3.0).map(|r| to_f64(&r)), Some(1.0 / 3.0));
        assert!(from_f64(f64::INFINITY).is_none());
    }
}
