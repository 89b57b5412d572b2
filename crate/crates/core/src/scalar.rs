//! Scalar backends.
//!
//! Every polynomial carries one backend for its whole lifetime: exact
//! rationals ([`Rational`]) for identity checks, `f64` for root finding and
//! scanning. The backend is a type parameter, so two backends can never meet
//! inside one arithmetic operation; [`crate::jetalgebra::AnyPoly`] restores the
//! runtime check for callers that pick a backend dynamically.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{MkitError, Result};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Backend {
    type Err = MkitError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(MkitError::Parse(format!("unknown backend `{other}`"))),
        }
    }
}

/// Field operations shared by both backends.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    const BACKEND: Backend;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Square root of a non-negative value; on the exact backend only perfect
    /// rational squares succeed.
    fn sqrt(&self) -> Option<Self>;

    /// Zero test: exact equality on rationals, `|x| <= tol` on floats.
    fn is_negligible(&self, tol: f64) -> bool;

    fn to_json(&self) -> serde_json::Value;

    /// Human-readable value: `p/q` on rationals, shortest round-trip on floats.
    fn show(&self) -> String {
        match self.to_json() {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        }
    }

    fn from_int(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    fn is_negative(&self) -> bool {
        self.to_f64() < 0.0
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sqrt(&self) -> Option<Self> {
        if Signed::is_negative(self) {
            return None;
        }
        let n = self.numer();
        let d = self.denom();
        let (rn, rd) = (Roots::sqrt(n), Roots::sqrt(d));
        if &(&rn * &rn) == n && &(&rd * &rd) == d {
            Some(Rational::new(rn, rd))
        } else {
            None
        }
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or_else(|| serde_json::Value::String(self.to_string()))
    }
}

/// `p/q`, or `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q`, or a finite decimal such as `-0.125` or `1e-3` into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || MkitError::Parse(format!("invalid rational `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(MkitError::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
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
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    Ok(if negative { -value } else { value })
}

/// Parses a JSON scalar: strings go through [`parse_rational`], numbers are
/// accepted on the float backend only unless they are integers.
pub fn scalar_from_json<S: Scalar>(v: &serde_json::Value) -> Result<S> {
    match v {
        serde_json::Value::String(s) => {
            if S::BACKEND == Backend::Float && !s.contains('/') {
                if let Ok(x) = s.trim().parse::<f64>() {
                    return Ok(float_exact::<S>(x));
                }
            }
            Ok(S::from_rational(&parse_rational(s)?))
        }
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(S::from_int(i))
            } else if S::BACKEND == Backend::Float {
                let x = n.as_f64().ok_or_else(|| MkitError::Parse(n.to_string()))?;
                Ok(float_exact::<S>(x))
            } else {
                Err(MkitError::Parse(format!("JSON number {n} is not exact; write rationals as \"p/q\" strings")))
            }
        }
        other => Err(MkitError::Parse(format!("expected a scalar, found {other}"))),
    }
}

// Rational::from_float is exact for finite f64, so the float backend gets the
// identical bit pattern back.
fn float_exact<S: Scalar>(x: f64) -> S {
    Rational::from_float(x).map(|r| S::from_rational(&r)).unwrap_or_else(|| S::from_ratio(0, 1))
}
