//! Non-inferability witnesses.
//!
//! A witness is a point set, a base polynomial and, for each certified point,
//! an alternative polynomial that flips that point's label while answering
//! every allowed query on every other point exactly as the base does. No
//! learner restricted to those queries can therefore infer the point from
//! the rest. Univariate witnesses are built and checked in exact rational
//! arithmetic. The bivariate construction uses transcendental points and is
//! checked in floating point with an explicit inconclusive zone.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::WitnessError;
use crate::learner::batch::{restricted_infer, QueriedPoint};
use crate::polynomial::{Polynomial, Sign, SignPattern};
use crate::Rational;

/// Default cap on the size of integers produced by the missing-derivative
/// construction.
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 20;

const MAX_HALVINGS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    /// Index into the witness points of the label this polynomial flips.
    pub point: usize,
    pub poly: Polynomial<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub construction: String,
    /// Degree bound of the class.
    pub d: usize,
    #[serde(with = "ratio_strings")]
    pub points: Vec<Rational>,
    pub base: Polynomial<Rational>,
    pub alternatives: Vec<Alternative>,
    pub query_orders: BTreeSet<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_ratio_string")]
    pub epsilon: Option<Rational>,
}

impl Witness {
    /// Checks agreement and flip conditions over the declared query orders.
    pub fn verify(&self) -> Result<(), WitnessError> {
        self.verify_orders(&self.query_orders)
    }

    /// As [`verify`](Self::verify), over an explicit set of orders.
    pub fn verify_orders(&self, orders: &BTreeSet<usize>) -> Result<(), WitnessError> {
        let base_derivs: Vec<_> = orders.iter().map(|&k| (k, self.base.derivative(k))).collect();
        for alt in &self.alternatives {
            let i = alt.point;
            let x = &self.points[i];
            if alt.poly.eval_sign(x) == self.base.eval_sign(x) {
                return Err(WitnessError::NoFlip { point: i });
            }
            for (k, base_k) in &base_derivs {
                let alt_k = alt.poly.derivative(*k);
                for (j, y) in self.points.iter().enumerate() {
                    if j != i && alt_k.eval_sign(y) != base_k.eval_sign(y) {
                        return Err(WitnessError::Agreement { point: i, other: j, order: *k });
                    }
                }
            }
        }
        Ok(())
    }

    /// What a learner allowed only `query_orders` observes at each point:
    /// the signs of orders `0, 1, ...` up to the first order it may not ask.
    pub fn observable_patterns(&self) -> Vec<SignPattern> {
        let prefix = (0..self.d).take_while(|k| self.query_orders.contains(k)).count();
        self.points
            .iter()
            .map(|x| SignPattern((0..prefix).map(|k| self.base.derivative(k).eval_sign(x)).collect()))
            .collect()
    }

    /// Points whose label the restricted rule recovers from the observable
    /// patterns of all the other points.
    pub fn restricted_inferable(&self) -> Vec<usize> {
        let patterns = self.observable_patterns();
        (0..self.points.len())
            .filter(|&i| {
                let others: Vec<QueriedPoint<Rational>> = self
                    .points
                    .iter()
                    .zip(&patterns)
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, (x, p))| QueriedPoint { x: x.clone(), pattern: p.clone() })
                    .collect();
                !restricted_infer(&others, std::slice::from_ref(&self.points[i]), self.d).is_empty()
            })
            .collect()
    }
}

fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Label-only witness on `{1, ..., n}` with base `x^2`: the alternative for
/// point `i` is `(x - i - 1/4)(x - i + 1/4)`, negative only near `i`.
pub fn interval_witness(n: usize) -> Result<Witness, WitnessError> {
    if n == 0 {
        return Err(WitnessError::OutOfRange("n must be at least 1".into()));
    }
    let quarter = Rational::new(BigInt::from(1), BigInt::from(4));
    let points: Vec<Rational> = (1..=n as i64).map(int).collect();
    let alternatives = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let roots = [p.clone() - quarter.clone(), p.clone() + quarter.clone()];
            Ok(Alternative { point: i, poly: Polynomial::from_roots(&roots, Sign::Pos)? })
        })
        .collect::<Result<_, WitnessError>>()?;
    Ok(Witness {
        construction: "interval".into(),
        d: 2,
        points,
        base: Polynomial::monomial(2),
        alternatives,
        query_orders: [0].into(),
        epsilon: None,
    })
}

/// `s_1 = d!`, `s_j = s_{j-1}^3 - 1`.
pub fn missing_derivative_points(d: usize, n: usize) -> Vec<BigInt> {
    let mut s = vec![(1..=d as i64).map(BigInt::from).product::<BigInt>()];
    while s.len() < n {
        let prev = s.last().expect("non-empty");
        s.push(prev * prev * prev - 1);
    }
    s
}

/// `x^d - d s^3 x^(d-1) + d(d-1) s^4 x^(d-2)` for `s = s_{j-1}`.
pub fn missing_derivative_alternative(d: usize, prev: &BigInt) -> Polynomial<Rational> {
    let mut coeffs = vec![Rational::zero(); d + 1];
    let dd = BigInt::from(d);
    coeffs[d] = Rational::one();
    coeffs[d - 1] = Rational::from_integer(-(&dd * prev.pow(3)));
    coeffs[d - 2] = Rational::from_integer(&dd * (&dd - 1) * prev.pow(4));
    Polynomial::new(coeffs)
}

/// Witness that order `d - 1` cannot be dropped: with every other order
/// available, no point of `{s_1, ..., s_n}` after the first can be inferred.
/// Base `x^d`; the alternative for `s_j` (`j >= 2`) is built from `s_{j-1}`.
pub fn missing_derivative_witness(d: usize, n: usize, bit_budget: u64) -> Result<Witness, WitnessError> {
    if d < 3 || !(2..=6).contains(&n) {
        return Err(WitnessError::OutOfRange(format!("need d >= 3 and 2 <= n <= 6, got d={d}, n={n}")));
    }
    let s = missing_derivative_points(d, n);
    let bits = s.last().expect("n >= 2").bits() * d as u64;
    if bits > bit_budget {
        return Err(WitnessError::SizeLimit { bits, budget: bit_budget });
    }
    let alternatives = (1..n)
        .map(|j| Alternative { point: j, poly: missing_derivative_alternative(d, &s[j - 1]) })
        .collect();
    let query_orders = (0..=d).filter(|&k| k != d - 1).collect();
    Ok(Witness {
        construction: "missing_derivative".into(),
        d,
        points: s.into_iter().map(Rational::from_integer).collect(),
        base: Polynomial::monomial(d),
        alternatives,
        query_orders,
        epsilon: None,
    })
}

/// The construction's own strict conditions: each alternative's derivatives
/// of every queried order are strictly positive at the other points, and the
/// alternative is strictly negative at its own point.
pub fn check_missing_derivative_conditions(w: &Witness) -> Result<(), WitnessError> {
    for alt in &w.alternatives {
        for &k in &w.query_orders {
            let dk = alt.poly.derivative(k);
            for (j, x) in w.points.iter().enumerate() {
                if j != alt.point && !dk.eval(x).is_positive() {
                    return Err(WitnessError::Condition(format!(
                        "order-{k} derivative of alternative {} is not positive at point {j}",
                        alt.point
                    )));
                }
            }
        }
        if !Signed::is_negative(&alt.poly.eval(&w.points[alt.point])) {
            return Err(WitnessError::Condition(format!(
                "alternative {} is not negative at its own point",
                alt.point
            )));
        }
    }
    Ok(())
}

fn linear_candidate(roots: &[Rational], eps: &Rational) -> Result<Witness, WitnessError> {
    let d = roots.len();
    let two_eps = eps.clone() + eps.clone();
    let base = Polynomial::from_roots(roots, Sign::Pos)?;
    let points = roots.iter().map(|r| r.clone() + eps.clone()).collect();
    let alternatives = (0..d)
        .map(|i| {
            let mut shifted: Vec<Rational> = roots.to_vec();
            shifted[i] = roots[i].clone() + two_eps.clone();
            shifted.sort();
            Ok(Alternative { point: i, poly: Polynomial::from_roots(&shifted, Sign::Pos)? })
        })
        .collect::<Result<_, WitnessError>>()?;
    Ok(Witness {
        construction: "linear".into(),
        d,
        points,
        base,
        alternatives,
        query_orders: (0..=d).collect(),
        epsilon: Some(eps.clone()),
    })
}

/// Size-`d` witness even with every derivative order available: base
/// `prod (x - r_i)` over negative roots, points `r_i + eps`, and alternative
/// `i` moves root `r_i` to `r_i + 2 eps`. `eps` must stay below a third of
/// the smallest root gap; it is halved from there until the exact check
/// passes.
pub fn linear_lower_witness(roots: &[Rational]) -> Result<Witness, WitnessError> {
    let d = roots.len();
    if d < 2 {
        return Err(WitnessError::OutOfRange("need at least two roots".into()));
    }
    if roots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(WitnessError::OutOfRange("roots must be strictly increasing".into()));
    }
    if roots.iter().any(|r| !Signed::is_negative(r)) {
        return Err(WitnessError::OutOfRange("roots must be negative".into()));
    }
    let min_gap = roots
        .windows(2)
        .map(|w| w[1].clone() - w[0].clone())
        .min()
        .expect("d >= 2");
    // the bound on eps is strict, so the first candidate is already halved
    let mut eps = min_gap / int(3);
    for _ in 0..MAX_HALVINGS {
        eps /= int(2);
        let w = linear_candidate(roots, &eps)?;
        if w.verify().is_ok() {
            return Ok(w);
        }
    }
    Err(WitnessError::EpsilonSearchFailed(MAX_HALVINGS))
}

/// Float checks of the bivariate quadratic construction on `n` points of the
/// unit arc in the first quadrant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateReport {
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
    pub tolerance: f64,
    pub points: Vec<[f64; 2]>,
    pub alternatives: Vec<AlternativeReport>,
    /// `"h"` (negative cross term) or `"h_prime"` (positive cross term).
    pub base_choice: String,
    /// Points whose alternative also matches the chosen base's cross-term sign,
    /// so every label, gradient and Hessian sign elsewhere agrees.
    pub certified: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeReport {
    pub point: usize,
    pub theta: f64,
    pub value_at_own: f64,
    /// Largest value, partial derivative or Hessian diagonal entry at the
    /// other points; all of them must be negative.
    pub max_elsewhere: f64,
    pub hessian_xx: f64,
    pub hessian_yy: f64,
    pub hessian_xy: f64,
    pub cross_sign: Sign,
}

/// `h_theta(x, y) = u v - c1 v^2 - c2 (x^2 + y^2 - 1)` with `(u, v)` the
/// point rotated by `theta`.
#[derive(Debug, Clone, Copy)]
struct Spun {
    cos: f64,
    sin: f64,
    c1: f64,
    c2: f64,
}

impl Spun {
    fn new(theta: f64, c1: f64, c2: f64) -> Self {
        Spun { cos: theta.cos(), sin: theta.sin(), c1, c2 }
    }

    fn uv(&self, x: f64, y: f64) -> (f64, f64) {
        (x * self.cos - y * self.sin, x * self.sin + y * self.cos)
    }

    fn value(&self, x: f64, y: f64) -> f64 {
        let (u, v) = self.uv(x, y);
        u * v - self.c1 * v * v - self.c2 * (x * x + y * y - 1.0)
    }

    fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        let [[hxx, hxy], [_, hyy]] = self.hessian();
        (hxx * x + hxy * y, hxy * x + hyy * y)
    }

    fn hessian(&self) -> [[f64; 2]; 2] {
        let (c, s) = (self.cos, self.sin);
        let hxx = 2.0 * s * c - 2.0 * self.c1 * s * s - 2.0 * self.c2;
        let hyy = -2.0 * s * c - 2.0 * self.c1 * c * c - 2.0 * self.c2;
        let hxy = c * c - s * s - 2.0 * self.c1 * s * c;
        [[hxx, hxy], [hxy, hyy]]
    }
}

pub fn multivariate_witness(n: usize) -> Result<MultivariateReport, WitnessError> {
    if !(2..=64).contains(&n) {
        return Err(WitnessError::OutOfRange(format!("need 2 <= n <= 64, got {n}")));
    }
    let step = PI / (2.0 * (n + 1) as f64);
    let points: Vec<[f64; 2]> = (1..=n)
        .map(|i| {
            let phi = step * i as f64;
            [phi.cos(), phi.sin()]
        })
        .collect();
    let c1 = 1.0 / step.tan();
    let c2 = c1 * c1 + c1 + 1.0;
    let tolerance = 1e-9 * (1.0 + c2);
    let epsilon = points
        .iter()
        .map(|&[x, y]| (x / y).abs().min((y / x).abs()))
        .fold(f64::INFINITY, f64::min);

    let strictly = |quantity: String, value: f64, want: Sign| -> Result<(), WitnessError> {
        if value.abs() <= tolerance {
            return Err(WitnessError::ToleranceBreach { quantity, value, tolerance });
        }
        if Sign::of(&value) != want {
            return Err(WitnessError::Condition(format!("{quantity} = {value:e} should be {want}")));
        }
        Ok(())
    };

    // both bases: values, partials and Hessian diagonal negative everywhere
    for (name, cross) in [("h", -epsilon), ("h_prime", epsilon)] {
        for (j, &[x, y]) in points.iter().enumerate() {
            strictly(format!("{name}(s_{j})"), -x * x - y * y + cross * x * y, Sign::Neg)?;
            strictly(format!("{name}_x(s_{j})"), -2.0 * x + cross * y, Sign::Neg)?;
            strictly(format!("{name}_y(s_{j})"), -2.0 * y + cross * x, Sign::Neg)?;
        }
    }

    let mut alternatives = Vec::with_capacity(n);
    for i in 0..n {
        let theta = -PI / (4.0 * (n + 1) as f64) - step * i as f64;
        let h = Spun::new(theta, c1, c2);
        let [[hxx, hxy], [_, hyy]] = h.hessian();
        strictly(format!("h_{i}_xx"), hxx, Sign::Neg)?;
        strictly(format!("h_{i}_yy"), hyy, Sign::Neg)?;
        strictly(format!("h_{i}_xy"), hxy, Sign::of(&hxy))?;
        let [xi, yi] = points[i];
        let own = h.value(xi, yi);
        strictly(format!("h_{i}(s_{i})"), own, Sign::Pos)?;
        let mut max_elsewhere = f64::NEG_INFINITY;
        for (j, &[x, y]) in points.iter().enumerate() {
            if j == i {
                continue;
            }
            let v = h.value(x, y);
            let (gx, gy) = h.grad(x, y);
            strictly(format!("h_{i}(s_{j})"), v, Sign::Neg)?;
            strictly(format!("h_{i}_x(s_{j})"), gx, Sign::Neg)?;
            strictly(format!("h_{i}_y(s_{j})"), gy, Sign::Neg)?;
            max_elsewhere = max_elsewhere.max(v).max(gx).max(gy).max(hxx).max(hyy);
        }
        alternatives.push(AlternativeReport {
            point: i,
            theta,
            value_at_own: own,
            max_elsewhere,
            hessian_xx: hxx,
            hessian_yy: hyy,
            hessian_xy: hxy,
            cross_sign: Sign::of(&hxy),
        });
    }

    let negative = alternatives.iter().filter(|a| a.cross_sign == Sign::Neg).count();
    let (base_choice, base_cross) = if 2 * negative > n {
        ("h", Sign::Neg)
    } else {
        ("h_prime", Sign::Pos)
    };
    let certified = alternatives
        .iter()
        .filter(|a| a.cross_sign == base_cross)
        .map(|a| a.point)
        .collect();

    Ok(MultivariateReport {
        n,
        c1,
        c2,
        epsilon,
        tolerance,
        points,
        alternatives,
        base_choice: base_choice.into(),
        certified,
    })
}

mod ratio_strings {
    use crate::scalar::{format_ratio, parse_ratio};
    use crate::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_ratio))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_ratio(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

mod opt_ratio_string {
    use crate::scalar::{format_ratio, parse_ratio};
    use crate::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&format_ratio(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse_ratio(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}
