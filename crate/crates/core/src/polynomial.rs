//! Dense univariate polynomials over a [`Scalar`] backend, with signs,
//! derivatives and sign patterns.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{PolyError, ScalarError};
use crate::scalar::{Backend, Scalar};

/// Sign of a real number, with `sign(0) = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Neg,
    #[serde(rename = "+")]
    Pos,
}

impl Sign {
    pub fn of<T: Scalar>(v: &T) -> Sign {
        if v.is_negative() {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Pos => "+",
            Sign::Neg => "-",
        })
    }
}

/// Signs of `f, f', f'', ...` at one point; entry `i` is the sign of the
/// `i`-th derivative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignPattern(pub Vec<Sign>);

impl SignPattern {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The label, i.e. the order-0 sign.
    pub fn label(&self) -> Option<Sign> {
        self.0.first().copied()
    }

    pub fn order(&self, i: usize) -> Option<Sign> {
        self.0.get(i).copied()
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}

/// `coeffs[i]` is the coefficient of `x^i`. Trailing zeros are trimmed, so the
/// zero polynomial has no coefficients at all.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    /// `x^k`
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = T::one();
        Polynomial { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| T::from_i64(c)).collect())
    }

    /// Expands `±(x - r_1)(x - r_2)...(x - r_k)`.
    pub fn from_roots(roots: &[T], leading: Sign) -> Result<Self, PolyError> {
        for (i, w) in roots.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(PolyError::DuplicateRoots { index: i + 1 });
            }
            if w[0] > w[1] {
                return Err(PolyError::UnsortedRoots { index: i + 1 });
            }
        }
        let mut coeffs = vec![T::one()];
        for r in roots {
            // multiply by (x - r)
            let mut next = vec![T::zero(); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] = next[i + 1].clone() + c.clone();
                next[i] = next[i].clone() - c.clone() * r.clone();
            }
            coeffs = next;
        }
        if leading == Sign::Neg {
            for c in coeffs.iter_mut() {
                *c = -c.clone();
            }
        }
        Ok(Self::new(coeffs))
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest power with a nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn derivative(&self, order: usize) -> Self {
        if order == 0 {
            return self.clone();
        }
        if order >= self.coeffs.len() {
            return Self::zero();
        }
        let coeffs = (order..self.coeffs.len())
            .map(|i| {
                // i * (i-1) * ... * (i-order+1)
                let falling: i64 = ((i - order + 1)..=i).map(|k| k as i64).product();
                self.coeffs[i].clone() * T::from_i64(falling)
            })
            .collect();
        Self::new(coeffs)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn eval_sign(&self, x: &T) -> Sign {
        Sign::of(&self.eval(x))
    }

    /// Signs of orders `0..=d` at `x`.
    pub fn sign_pattern(&self, x: &T, d: usize) -> SignPattern {
        SignPattern((0..=d).map(|i| self.derivative(i).eval_sign(x)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).cloned().unwrap_or_else(T::zero);
                let b = other.coeffs.get(i).cloned().unwrap_or_else(T::zero);
                a + b
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(coeffs)
    }

    pub fn scale(&self, k: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * k.clone()).collect())
    }

    pub fn to_f64(&self) -> Polynomial<f64> {
        Polynomial::new(self.coeffs.iter().map(Scalar::to_f64).collect())
    }

    pub fn to_record(&self) -> PolynomialRecord {
        PolynomialRecord {
            coeffs: self.coeffs.iter().map(Scalar::to_json).collect(),
            backend: T::BACKEND,
        }
    }

    pub fn from_record(rec: &PolynomialRecord) -> Result<Self, ScalarError> {
        if rec.backend != T::BACKEND {
            return Err(ScalarError::BackendMismatch {
                expected: T::BACKEND.to_string(),
                found: rec.backend.to_string(),
            });
        }
        let coeffs = rec
            .coeffs
            .iter()
            .map(T::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(coeffs))
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c:?}")?,
                1 => write!(f, "{c:?}x")?,
                _ => write!(f, "{c:?}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// JSON form: `{"coeffs": [...], "backend": "exact"|"float"}`. Exact
/// coefficients are `"num/den"` strings, float coefficients are numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialRecord {
    pub coeffs: Vec<Value>,
    pub backend: Backend,
}

impl<T: Scalar> Serialize for Polynomial<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Polynomial<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rec = PolynomialRecord::deserialize(d)?;
        Polynomial::from_record(&rec).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn from_roots_expands() {
        let p = Polynomial::<Q>::from_roots(&[q(1, 1), q(2, 1)], Sign::Pos).unwrap();
        assert_eq!(p, Polynomial::from_i64s(&[2, -3, 1]));
        let p = Polynomial::<Q>::from_roots(&[q(0, 1)], Sign::Pos).unwrap();
        assert_eq!(p, Polynomial::from_i64s(&[0, 1]));
        let p = Polynomial::<Q>::from_roots(&[q(1, 1), q(2, 1)], Sign::Neg).unwrap();
        assert_eq!(p, Polynomial::from_i64s(&[-2, 3, -1]));
    }

    #[test]
    fn from_roots_three_quarters() {
        // (x - 1/4)(x - 1/2)(x - 3/4) expanded by hand over Q
        let p = Polynomial::<Q>::from_roots(&[q(1, 4), q(1, 2), q(3, 4)], Sign::Pos).unwrap();
        assert_eq!(p.coeffs(), &[q(-3, 32), q(11, 16), q(-3, 2), q(1, 1)]);
        let f = p.to_f64();
        assert_eq!(f.coeffs(), &[-0.09375, 0.6875, -1.5, 1.0]);
        let direct = Polynomial::<f64>::from_roots(&[0.25, 0.5, 0.75], Sign::Pos).unwrap();
        assert_eq!(direct.coeffs(), f.coeffs());
    }

    #[test]
    fn from_roots_rejects_duplicates() {
        let err = Polynomial::<f64>::from_roots(&[0.5, 0.5], Sign::Pos).unwrap_err();
        assert_eq!(err, PolyError::DuplicateRoots { index: 1 });
        let err = Polynomial::<f64>::from_roots(&[0.7, 0.5], Sign::Pos).unwrap_err();
        assert_eq!(err, PolyError::UnsortedRoots { index: 1 });
    }

    #[test]
    fn derivatives() {
        let cube = Polynomial::<Q>::monomial(3);
        assert_eq!(cube.derivative(2), Polynomial::from_i64s(&[0, 6]));
        let p = Polynomial::<Q>::from_i64s(&[2, -3, 1]);
        assert_eq!(p.derivative(1), Polynomial::from_i64s(&[-3, 2]));
        assert!(p.derivative(5).is_zero());
        assert_eq!(p.derivative(0), p);
        assert_eq!(p.derivative(2).degree(), Some(0));
        assert_eq!(p.derivative(3).degree(), None);
    }

    #[test]
    fn signs_follow_zero_convention() {
        let p = Polynomial::<Q>::from_i64s(&[-1, 0, 1]);
        assert_eq!(p.eval_sign(&q(0, 1)), Sign::Neg);
        assert_eq!(p.eval_sign(&q(1, 1)), Sign::Pos);
        assert_eq!(Polynomial::<Q>::zero().eval_sign(&q(3, 1)), Sign::Pos);
    }

    #[test]
    fn large_integer_sign() {
        let p = Polynomial::<Q>::from_i64s(&[0, 7776, -648, 1]);
        assert_eq!(p.eval(&q(215, 1)), q(-18_343_585, 1));
        assert_eq!(p.eval_sign(&q(215, 1)), Sign::Neg);
    }

    #[test]
    fn patterns_of_square() {
        use Sign::*;
        let p = Polynomial::<Q>::monomial(2);
        assert_eq!(p.sign_pattern(&q(1, 1), 2).0, vec![Pos, Pos, Pos]);
        assert_eq!(p.sign_pattern(&q(-1, 1), 2).0, vec![Pos, Neg, Pos]);
        assert_eq!(p.sign_pattern(&q(0, 1), 2).0, vec![Pos, Pos, Pos]);
        assert_eq!(p.sign_pattern(&q(0, 1), 2).to_string(), "[+,+,+]");
    }

    #[test]
    fn json_records() {
        let p = Polynomial::<Q>::from_roots(&[q(1, 4), q(1, 2)], Sign::Pos).unwrap();
        let js = serde_json::to_value(&p).unwrap();
        assert_eq!(
            js,
            serde_json::json!({"coeffs": ["1/8", "-3/4", "1/1"], "backend": "exact"})
        );
        let back: Polynomial<Q> = serde_json::from_value(js.clone()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_value::<Polynomial<f64>>(js).is_err());

        let f = Polynomial::<f64>::from_i64s(&[1, 0, -2]);
        let js = serde_json::to_value(&f).unwrap();
        assert_eq!(js, serde_json::json!({"coeffs": [1.0, 0.0, -2.0], "backend": "float"}));
    }
}
