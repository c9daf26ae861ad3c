//! Query oracle for a hidden polynomial, with query and round accounting.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::polynomial::{Polynomial, Sign, SignPattern};
use crate::scalar::Scalar;

/// Derivative orders a learner may ask about, for ambient degree bound `d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySet {
    pub d: usize,
    allowed: BTreeSet<usize>,
}

impl QuerySet {
    /// Orders `0..d`: labels plus every non-constant derivative.
    pub fn full(d: usize) -> Self {
        QuerySet { d, allowed: (0..d.max(1)).collect() }
    }

    pub fn labels_only(d: usize) -> Self {
        QuerySet { d, allowed: [0].into() }
    }

    /// Full set with order `missing` removed.
    pub fn without(d: usize, missing: usize) -> Self {
        let mut qs = Self::full(d);
        if missing != 0 {
            qs.allowed.remove(&missing);
        }
        qs
    }

    pub fn allows(&self, order: usize) -> bool {
        self.allowed.contains(&order)
    }

    pub fn orders(&self) -> impl Iterator<Item = usize> + '_ {
        self.allowed.iter().copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub total: u64,
    pub rounds: u64,
    pub per_order: BTreeMap<usize, u64>,
}

impl QueryLedger {
    fn charge(&mut self, order: usize, count: u64) {
        self.total += count;
        *self.per_order.entry(order).or_insert(0) += count;
    }

    pub fn order(&self, order: usize) -> u64 {
        self.per_order.get(&order).copied().unwrap_or(0)
    }
}

/// Answers sign queries about a hidden polynomial. The oracle never caches:
/// asking twice costs twice.
#[derive(Debug, Clone)]
pub struct Oracle<T> {
    hidden: Polynomial<T>,
    derivatives: Vec<Polynomial<T>>,
    qset: QuerySet,
    ledger: QueryLedger,
}

impl<T: Scalar> Oracle<T> {
    pub fn new(hidden: Polynomial<T>, qset: QuerySet) -> Self {
        let top = qset.orders().max().unwrap_or(0);
        let derivatives = (0..=top).map(|i| hidden.derivative(i)).collect();
        Oracle { hidden, derivatives, qset, ledger: QueryLedger::default() }
    }

    pub fn query_set(&self) -> &QuerySet {
        &self.qset
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    fn check(&self, order: usize) -> Result<(), OracleError> {
        if self.qset.allows(order) {
            Ok(())
        } else {
            Err(OracleError::DisallowedOrder { order })
        }
    }

    fn answer(&self, x: &T, order: usize) -> Sign {
        self.derivatives[order].eval_sign(x)
    }

    /// One query in its own round.
    pub fn query(&mut self, x: &T, order: usize) -> Result<Sign, OracleError> {
        self.check(order)?;
        self.ledger.charge(order, 1);
        self.ledger.rounds += 1;
        Ok(self.answer(x, order))
    }

    /// All requests in a single round. Rejected as a whole, with the ledger
    /// untouched, if any order is disallowed. Empty batches are free.
    pub fn query_batch(&mut self, requests: &[(&T, usize)]) -> Result<Vec<Sign>, OracleError> {
        for &(_, order) in requests {
            self.check(order)?;
        }
        if requests.is_empty() {
            return Ok(Vec::new());
        }
        self.ledger.rounds += 1;
        Ok(requests
            .iter()
            .map(|&(x, order)| {
                self.ledger.charge(order, 1);
                self.answer(x, order)
            })
            .collect())
    }

    /// Signs of orders `0..d` at `x`, in one round, costing `d` queries.
    pub fn full_pattern_query(&mut self, x: &T) -> Result<SignPattern, OracleError> {
        let mut out = self.full_pattern_batch(&[x])?;
        Ok(out.pop().expect("one point in, one pattern out"))
    }

    /// Full patterns for every point, in one round.
    pub fn full_pattern_batch(&mut self, xs: &[&T]) -> Result<Vec<SignPattern>, OracleError> {
        let d = self.qset.d.max(1);
        for order in 0..d {
            self.check(order)?;
        }
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        self.ledger.rounds += 1;
        for order in 0..d {
            self.ledger.charge(order, xs.len() as u64);
        }
        Ok(xs
            .iter()
            .map(|x| SignPattern((0..d).map(|order| self.answer(x, order)).collect()))
            .collect())
    }

    /// Ground truth labels, for verification only. Not charged.
    pub fn reveal_labels(&self, points: &[T]) -> Vec<Sign> {
        points.iter().map(|x| self.hidden.eval_sign(x)).collect()
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

    fn quad() -> Polynomial<Q> {
        Polynomial::from_i64s(&[2, -3, 1])
    }

    #[test]
    fn single_queries() {
        let mut o = Oracle::new(quad(), QuerySet::full(2));
        assert_eq!(o.query(&q(0, 1), 0), Ok(Sign::Pos));
        assert_eq!(o.ledger().total, 1);
        // 2 * 1.5 - 3 = 0, and sign(0) = +
        assert_eq!(o.query(&q(3, 2), 1), Ok(Sign::Pos));
        assert_eq!(o.ledger().rounds, 2);
        assert_eq!(o.ledger().order(1), 1);
    }

    #[test]
    fn disallowed_order() {
        let mut o = Oracle::new(Polynomial::<Q>::monomial(2), QuerySet::labels_only(2));
        assert_eq!(o.query(&q(5, 1), 1), Err(OracleError::DisallowedOrder { order: 1 }));
        assert_eq!(o.ledger(), &QueryLedger::default());
    }

    #[test]
    fn batches() {
        let mut o = Oracle::new(quad(), QuerySet::labels_only(2));
        let xs = [q(0, 1), q(3, 2), q(3, 1)];
        let reqs: Vec<_> = xs.iter().map(|x| (x, 0)).collect();
        let out = o.query_batch(&reqs).unwrap();
        assert_eq!(out, vec![Sign::Pos, Sign::Neg, Sign::Pos]);
        assert_eq!((o.ledger().total, o.ledger().rounds), (3, 1));

        assert!(o.query_batch(&[]).unwrap().is_empty());
        assert_eq!(o.ledger().rounds, 1);

        let bad = [(&xs[0], 0), (&xs[1], 1), (&xs[2], 0)];
        assert!(o.query_batch(&bad).is_err());
        assert_eq!((o.ledger().total, o.ledger().rounds), (3, 1));
    }

    #[test]
    fn full_patterns_cost_d() {
        let mut o = Oracle::new(Polynomial::<Q>::monomial(2), QuerySet::full(2));
        let p = o.full_pattern_query(&q(-1, 1)).unwrap();
        assert_eq!(p.0, vec![Sign::Pos, Sign::Neg]);
        assert_eq!(o.ledger().total, 2);
        let again = o.full_pattern_query(&q(-1, 1)).unwrap();
        assert_eq!(again, p);
        assert_eq!((o.ledger().total, o.ledger().rounds), (4, 2));

        let mut o = Oracle::new(Polynomial::<f64>::monomial(5), QuerySet::full(5));
        o.full_pattern_query(&0.5).unwrap();
        assert_eq!(o.ledger().total, 5);

        let mut o = Oracle::new(Polynomial::<f64>::monomial(3), QuerySet::without(3, 1));
        assert!(o.full_pattern_query(&0.5).is_err());
    }

    #[test]
    fn ledger_json() {
        let mut o = Oracle::new(quad(), QuerySet::full(2));
        o.query(&q(0, 1), 0).unwrap();
        o.query(&q(0, 1), 1).unwrap();
        o.query(&q(1, 1), 1).unwrap();
        let js = serde_json::to_value(o.ledger()).unwrap();
        assert_eq!(
            js,
            serde_json::json!({"total": 3, "rounds": 3, "per_order": {"0": 1, "1": 2}})
        );
    }
}
