//! Numeric backends.
//!
//! Every algorithm in the crate is generic over [`Scalar`]. Two backends ship:
//! [`BigRational`] for exact arithmetic, where comparisons carry no tolerance,
//! and `f64`, where reserve comparisons accept an absolute slack of
//! [`FLOAT_RESERVE_EPS`] and profit comparisons a relative slack of
//! [`FLOAT_PROFIT_REL_EPS`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FLOAT_RESERVE_EPS: f64 = 1e-9;
pub const FLOAT_PROFIT_REL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericMode {
    Exact,
    Float,
}

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const MODE: NumericMode;

    /// Parses a decimal string (`"12.5"`, `"-3e-2"`) or a ratio (`"19/100"`).
    fn parse(s: &str) -> Result<Self>;

    fn from_rational(r: &BigRational) -> Self;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Square root; `None` when it cannot be represented (irrational input in
    /// exact mode, or a negative argument).
    fn sqrt(&self) -> Option<Self>;

    fn is_finite(&self) -> bool;

    /// Lossless textual form: decimal when possible, `p/q` otherwise.
    fn render(&self) -> String;

    /// Absolute slack for reserve comparisons (zero in exact mode).
    fn reserve_eps() -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

/// `a <= b` up to the reserve slack.
pub fn le_eps<S: Scalar>(a: &S, b: &S) -> bool {
    *a <= b.clone() + S::reserve_eps()
}

/// Equality within `rel` relative tolerance (exact equality in exact mode).
/// The scale has a floor of one so values near zero compare absolutely.
pub fn approx_eq<S: Scalar>(a: &S, b: &S, rel: f64) -> bool {
    match S::MODE {
        NumericMode::Exact => a == b,
        NumericMode::Float => {
            let (a, b) = (a.to_f64(), b.to_f64());
            let scale = a.abs().max(b.abs()).max(1.0);
            (a - b).abs() <= rel * scale
        }
    }
}

pub fn min<S: Scalar>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

pub fn max<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

fn parse_err(input: &str, reason: &str) -> Error {
    Error::Parse {
        input: input.to_string(),
        reason: reason.to_string(),
    }
}

/// Exact parse of a decimal or `p/q` string into a rational.
pub fn parse_rational(input: &str) -> Result<BigRational> {
    let s = input.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num.trim()).ok_or_else(|| parse_err(input, "bad numerator"))?;
        let den = parse_decimal(den.trim()).ok_or_else(|| parse_err(input, "bad denominator"))?;
        if den.is_zero() {
            return Err(parse_err(input, "zero denominator"));
        }
        return Ok(num / den);
    }
    parse_decimal(s).ok_or_else(|| parse_err(input, "expected a decimal number or p/q"))
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().ok()?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Renders a rational as a terminating decimal when its denominator divides a
/// power of ten, and as `p/q` otherwise.
pub fn render_rational(r: &BigRational) -> String {
    let den = r.denom();
    if den.is_one() {
        return r.numer().to_string();
    }
    let mut rest = den.clone();
    let (two, five) = (BigInt::from(2u32), BigInt::from(5u32));
    let (mut twos, mut fives) = (0usize, 0usize);
    while rest.is_even() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{}/{}", r.numer(), den);
    }
    let places = twos.max(fives);
    let scaled = r.numer() * (num_traits::pow(BigInt::from(10u32), places) / den);
    let negative = scaled.sign() == Sign::Minus;
    let digits = scaled.abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    format!("{}{int_part}.{frac_part}", if negative { "-" } else { "" })
}

fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

impl Scalar for BigRational {
    const MODE: NumericMode = NumericMode::Exact;

    fn parse(s: &str) -> Result<Self> {
        parse_rational(s)
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sqrt(&self) -> Option<Self> {
        exact_sqrt(self)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn render(&self) -> String {
        render_rational(self)
    }

    fn reserve_eps() -> Self {
        Self::zero()
    }
}

impl Scalar for f64 {
    const MODE: NumericMode = NumericMode::Float;

    fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| parse_err(s, "bad numerator"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| parse_err(s, "bad denominator"))?;
            if den == 0.0 {
                return Err(parse_err(s, "zero denominator"));
            }
            return Ok(num / den);
        }
        // Reject "inf", "nan" and friends that `f64::from_str` accepts.
        parse_decimal(t).ok_or_else(|| parse_err(s, "expected a decimal number or p/q"))?;
        t.parse()
            .map_err(|_| parse_err(s, "expected a decimal number"))
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn render(&self) -> String {
        // Display on f64 prints the shortest decimal that round-trips.
        format!("{self}")
    }

    fn reserve_eps() -> Self {
        FLOAT_RESERVE_EPS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_decimals_and_ratios() {
        assert_eq!(parse_rational("0.19").unwrap(), rat(19, 100));
        assert_eq!(parse_rational("19/100").unwrap(), rat(19, 100));
        assert_eq!(parse_rational("-2.5e1").unwrap(), rat(-25, 1));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("10000").unwrap(), rat(10000, 1));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
        assert!(<f64 as Scalar>::parse("inf").is_err());
        assert_eq!(<f64 as Scalar>::parse("19/100").unwrap(), 0.19);
    }

    #[test]
    fn renders_terminating_and_repeating() {
        assert_eq!(render_rational(&rat(243, 10)), "24.3");
        assert_eq!(render_rational(&rat(-1, 8)), "-0.125");
        assert_eq!(render_rational(&rat(3, 100)), "0.03");
        assert_eq!(render_rational(&rat(10, 11)), "10/11");
        assert_eq!(render_rational(&rat(7, 1)), "7");
    }

    #[test]
    fn exact_sqrt_detects_rationality() {
        assert_eq!(exact_sqrt(&rat(81, 100)), Some(rat(9, 10)));
        assert_eq!(exact_sqrt(&rat(7, 10)), None);
        assert_eq!(exact_sqrt(&rat(-4, 1)), None);
    }

    #[test]
    fn tolerances() {
        assert!(le_eps(&(1.0 + 5e-10), &1.0));
        assert!(!le_eps(&(1.0 + 5e-9), &1.0));
        assert!(!le_eps(
            &(rat(1, 1) + rat(1, 1_000_000_000_000)),
            &rat(1, 1)
        ));
        assert!(approx_eq(&1.0, &(1.0 + 1e-13), 1e-12));
        assert!(!approx_eq(&rat(1, 3), &rat(333_333, 1_000_000), 1e-3));
    }

    proptest::proptest! {
        #[test]
        fn render_then_parse_is_identity(n in -1_000_000i64..1_000_000, d in 1i64..5_000) {
            let r = rat(n, d);
            proptest::prop_assert_eq!(parse_rational(&render_rational(&r)).unwrap(), r);
        }

        #[test]
        fn float_render_round_trips(v in -1e12f64..1e12) {
            proptest::prop_assert_eq!(<f64 as Scalar>::parse(&v.render()).unwrap(), v);
        }
    }
}
