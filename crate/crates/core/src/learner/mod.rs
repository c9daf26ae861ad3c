//! Perfect learners: each labels every point of a finite sample with zero
//! error, using as few oracle queries as it can.

pub mod avgcase;
pub mod batch;
pub mod iterative;

use crate::error::LearnError;
use crate::oracle::{Oracle, QuerySet};
use crate::polynomial::{Polynomial, Sign};
use crate::scalar::Scalar;

/// A sorted sample plus the hidden classifier. The hidden polynomial is only
/// reachable through an [`Oracle`] or the ground-truth helpers.
#[derive(Debug, Clone)]
pub struct Instance<T> {
    points: Vec<T>,
    hidden: Polynomial<T>,
    d: usize,
}

impl<T: Scalar> Instance<T> {
    pub fn new(points: Vec<T>, hidden: Polynomial<T>, d: usize) -> Result<Self, LearnError> {
        if let Some(i) = points.windows(2).position(|w| w[0] >= w[1]) {
            return Err(LearnError::UnsortedPoints(i + 1));
        }
        Ok(Instance { points, hidden, d })
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn oracle(&self, qset: QuerySet) -> Oracle<T> {
        Oracle::new(self.hidden.clone(), qset)
    }

    pub fn ground_truth(&self) -> Vec<Sign> {
        self.points.iter().map(|x| self.hidden.eval_sign(x)).collect()
    }

    /// Ground-truth signs of the `order`-th derivative.
    pub fn ground_truth_order(&self, order: usize) -> Vec<Sign> {
        let p = self.hidden.derivative(order);
        self.points.iter().map(|x| p.eval_sign(x)).collect()
    }

    /// Hidden polynomial, for verification and visualisation only.
    pub fn hidden(&self) -> &Polynomial<T> {
        &self.hidden
    }
}

/// `ceil(log2(n))`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log2_ceiling() {
        let got: Vec<u32> = [1, 2, 3, 4, 5, 1024, 1025].iter().map(|&n| ceil_log2(n)).collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 10, 11]);
    }

    #[test]
    fn instance_requires_sorted_points() {
        let p = Polynomial::<f64>::monomial(1);
        assert!(Instance::new(vec![0.1, 0.1], p.clone(), 1).is_err());
        assert!(Instance::new(vec![0.2, 0.1], p.clone(), 1).is_err());
        assert!(Instance::new(vec![0.1, 0.2], p, 1).is_ok());
    }
}
