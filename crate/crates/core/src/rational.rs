//! Exact rational helpers shared by every module.
//!
//! All prices, trade sizes and valuations are [`Rational`]s. Text forms
//! accepted by [`parse_rational`]: integers (`3`, `-2`), fractions (`1/2`)
//! and finite decimals (`0.9`, `-0.125`).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct RationalParseError(pub String);

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn half() -> Rational {
    ratio(1, 2)
}

pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let err = || RationalParseError(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let num: BigInt = n.trim().parse().map_err(|_| err())?;
        let den: BigInt = d.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{}{}", if whole.is_empty() { "0" } else { whole }, frac);
    let num: BigInt = digits.parse().map_err(|_| err())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// `num/den` in lowest terms; integers print as `n/1`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn clamp(v: Rational, lo: &Rational, hi: &Rational) -> Rational {
    if &v < lo {
        lo.clone()
    } else if &v > hi {
        hi.clone()
    } else {
        v
    }
}

/// Largest multiple of `step` that is `<= v`.
pub fn floor_to(v: &Rational, step: &Rational) -> Rational {
    (v / step).floor() * step
}

/// Nearest multiple of `step`, ties rounded down.
pub fn round_to(v: &Rational, step: &Rational) -> Rational {
    let q = v / step;
    let fl = q.floor();
    if &q - &fl > half() {
        (fl + Rational::one()) * step
    } else {
        fl * step
    }
}

/// True when `v` is an integer multiple of `step`.
pub fn is_multiple_of(v: &Rational, step: &Rational) -> bool {
    (v / step).is_integer()
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Lossy conversion for display only.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Denominator of `r` divides `den`.
pub fn denominator_divides(r: &Rational, den: &BigInt) -> bool {
    den.is_multiple_of(r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse_rational("0.9").unwrap(), ratio(9, 10));
        assert_eq!(parse_rational("-0.125").unwrap(), ratio(-1, 8));
        assert_eq!(parse_rational("1/1024").unwrap(), ratio(1, 1024));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational(".5").unwrap(), half());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("-").is_err());
    }

    #[test]
    fn rounding_helpers() {
        let step = ratio(1, 1024);
        assert_eq!(floor_to(&ratio(9, 10), &step), ratio(921, 1024));
        assert_eq!(round_to(&ratio(9, 10), &step), ratio(922, 1024));
        assert!(is_multiple_of(&ratio(3, 4), &step));
        assert!(!is_multiple_of(&ratio(1, 3), &step));
        assert_eq!(format_rational(&int(2)), "2/1");
    }
}
