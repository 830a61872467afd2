//! Exact rational helpers.
//!
//! Every payoff, probability and discount factor in this crate is a
//! [`Rational`]. Text rendering uses `p/q`, or a bare integer when the
//! denominator is one.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational `{0}`")]
pub struct ParseRationalError(pub String);

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d`, reduced. Panics on a zero denominator.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses an integer (`-3`), a fraction (`7/2`) or a finite decimal (`0.25`).
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_int(num).ok_or_else(err)?;
        let den = parse_int(den).ok_or_else(err)?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let digits = format!("{whole_digits}{frac}");
        let mut num = BigInt::from_str(&digits).map_err(|_| err())?;
        if negative {
            num = -num;
        }
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(Rational::new(num, den));
    }
    parse_int(s).map(Rational::from_integer).ok_or_else(err)
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s).ok()
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Fixed-point rendering with `places` digits, rounded half away from zero.
pub fn format_decimal(r: &Rational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = r.abs() * Rational::from_integer(scale.clone());
    let rounded = (scaled + ratio(1, 2)).floor().to_integer();
    let int_part = &rounded / &scale;
    let frac_part = &rounded % &scale;
    let sign = if r.is_negative() && !rounded.is_zero() {
        "-"
    } else {
        ""
    };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!(
            "{sign}{int_part}.{:0>width$}",
            frac_part.to_string(),
            width = places
        )
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn format_vector(values: &[Rational]) -> String {
    let parts: Vec<String> = values.iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_three_forms() {
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(parse_rational("6/8").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("0.3").unwrap(), ratio(3, 10));
        assert_eq!(parse_rational("-1.25").unwrap(), ratio(-5, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), ratio(-1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "a", "1.", ".5x", "1/2/3", "--1", "1e3"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formatting() {
        assert_eq!(format_rational(&ratio(-6, 4)), "-3/2");
        assert_eq!(format_rational(&int(7)), "7");
        assert_eq!(format_decimal(&ratio(1, 4), 6), "0.250000");
        assert_eq!(format_decimal(&ratio(-2, 3), 3), "-0.667");
        assert_eq!(format_decimal(&int(5), 2), "5.00");
    }
}
