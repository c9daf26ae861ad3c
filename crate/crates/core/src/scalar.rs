//! Numeric backends.
//!
//! Two backends are supported: exact rationals ([`BigRational`]) and binary
//! floats (`f64`). Code generic over [`Scalar`] can never mix the two, since
//! each instantiation is a distinct type.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ScalarError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Float => f.write_str("float"),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(ScalarError::UnknownBackend(other.to_string())),
        }
    }
}

/// A real number in one of the supported backends.
pub trait Scalar:
    Clone + fmt::Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    const BACKEND: Backend;

    fn from_i64(v: i64) -> Self;

    /// Exact conversion of a finite float. `None` for NaN and infinities.
    fn from_f64(v: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    fn is_negative(&self) -> bool;

    fn abs(&self) -> Self;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self, ScalarError>;
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negative(&self) -> bool {
        *self < 0.0
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn to_json(&self) -> Value {
        Value::from(*self)
    }

    fn from_json(v: &Value) -> Result<Self, ScalarError> {
        v.as_f64()
            .ok_or_else(|| ScalarError::Parse(v.to_string()))
    }
}

impl Scalar for BigRational {
    const BACKEND: Backend = Backend::Exact;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_f64(v: f64) -> Option<Self> {
        <BigRational as FromPrimitive>::from_f64(v)
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn to_json(&self) -> Value {
        Value::String(format_ratio(self))
    }

    fn from_json(v: &Value) -> Result<Self, ScalarError> {
        let s = v.as_str().ok_or_else(|| ScalarError::Parse(v.to_string()))?;
        parse_ratio(s)
    }
}

/// Formats as `"num/den"`; integers still carry the `/1`.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_ratio(s: &str) -> Result<BigRational, ScalarError> {
    let bad = || ScalarError::Parse(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num = BigInt::from_str_radix(num, 10).map_err(|_| bad())?;
    let den = BigInt::from_str_radix(den, 10).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

// Ratio::to_f64 overflows to NaN for huge numerators and denominators, so
// shift both down to 64 significant bits first.
fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() {
            return v;
        }
    }
    let (num, den) = (r.numer(), r.denom());
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let n = ToPrimitive::to_f64(&(num >> ns as usize)).unwrap_or(0.0);
    let d = ToPrimitive::to_f64(&(den >> ds as usize)).unwrap_or(1.0);
    let exp = (ns - ds).clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    (n / d) * 2f64.powi(exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_roundtrip_through_string() {
        let r = BigRational::new(BigInt::from(-6), BigInt::from(8));
        assert_eq!(format_ratio(&r), "-3/4");
        assert_eq!(parse_ratio("-3/4").unwrap(), r);
        assert_eq!(parse_ratio("7").unwrap(), <BigRational as Scalar>::from_i64(7));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x/2").is_err());
    }

    #[test]
    fn lowest_terms_with_positive_denominator() {
        let r = parse_ratio("4/-6").unwrap();
        assert_eq!(r.numer(), &BigInt::from(-2));
        assert_eq!(r.denom(), &BigInt::from(3));
    }

    #[test]
    fn float_conversion_is_exact() {
        let x = 0.1f64;
        let r = <BigRational as Scalar>::from_f64(x).unwrap();
        assert_eq!(Scalar::to_f64(&r), x);
        assert!(<BigRational as Scalar>::from_f64(f64::NAN).is_none());
    }

    #[test]
    fn huge_ratio_converts() {
        let big = BigInt::from(3u8).pow(2000);
        let r = BigRational::new(big.clone() * BigInt::from(2) + BigInt::from(1), big);
        assert_eq!(Scalar::to_f64(&r), 2.0);
    }
}
