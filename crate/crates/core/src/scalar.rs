//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All set-function arithmetic, oracles and LP code are written against
//! [`Scalar`]. Floating point (`f32`, `f64`) is the workhorse; `BigRational`
//! gives exact answers for the hardness constants and small fixtures.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Number type used throughout the crate.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Comparison slack for inequality checks. Zero for exact types.
    fn tolerance() -> Self;

    fn from_f64_lossy(x: f64) -> Self;

    fn to_f64_lossy(&self) -> f64;

    /// Parses `"p/q"`, integers, and decimals (`"1.25"`, `"2e-3"`).
    fn parse_scalar(s: &str) -> Option<Self>;

    /// Canonical textual form: `"p/q"` (or `"p"`) for exact types, shortest
    /// round-trip decimal for floats.
    fn render(&self) -> String;

    /// Square root; exact types round through `f64`.
    fn sqrt_lossy(&self) -> Self;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer fits in scalar")
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn from_u64_exact(v: u64) -> Self {
        Self::from_u64(v).expect("integer fits in scalar")
    }

    /// `a >= b` up to [`Scalar::tolerance`].
    fn approx_ge(a: &Self, b: &Self) -> bool {
        a.clone() + Self::tolerance() >= *b
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

fn parse_float_fraction<F: FromStr>(s: &str, div: impl Fn(F, F) -> F) -> Option<F> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => Some(div(p.trim().parse().ok()?, q.trim().parse().ok()?)),
        None => s.parse().ok(),
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        1e-9
    }

    fn from_f64_lossy(x: f64) -> Self {
        x
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn parse_scalar(s: &str) -> Option<Self> {
        parse_float_fraction::<f64>(s, |a, b| a / b).filter(|v| v.is_finite())
    }

    fn render(&self) -> String {
        format!("{self}")
    }

    fn sqrt_lossy(&self) -> Self {
        self.sqrt()
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        1e-4
    }

    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }

    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }

    fn parse_scalar(s: &str) -> Option<Self> {
        parse_float_fraction::<f32>(s, |a, b| a / b).filter(|v| v.is_finite())
    }

    fn render(&self) -> String {
        format!("{self}")
    }

    fn sqrt_lossy(&self) -> Self {
        self.sqrt()
    }
}

/// Parses a decimal literal with optional exponent into an exact rational.
fn parse_decimal_exact(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
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

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn from_f64_lossy(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn parse_scalar(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let p = BigInt::from_str(p.trim()).ok()?;
                let q = BigInt::from_str(q.trim()).ok()?;
                if q.is_zero() {
                    return None;
                }
                Some(BigRational::new(p, q))
            }
            None => parse_decimal_exact(s),
        }
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn sqrt_lossy(&self) -> Self {
        Self::from_f64_lossy(self.to_f64_lossy().sqrt())
    }
}

/// Formats `x` with `digits` significant digits, trimming trailing zeros.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
