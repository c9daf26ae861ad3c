//! Deterministic level-by-level learner.
//!
//! Signs are learned from the highest queryable derivative down to the
//! labels. Once every order above `i` is known on the whole sample, the
//! sample splits into contiguous runs sharing the same higher-order pattern.
//! On each run the `i`-th derivative is monotone, so a binary search over
//! the run recovers all of its order-`i` signs.

use serde::{Deserialize, Serialize};

use crate::error::LearnError;
use crate::learner::ceil_log2;
use crate::oracle::Oracle;
use crate::polynomial::Sign;
use crate::scalar::Scalar;

/// Inclusive range of point indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: usize,
    pub hi: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Signs of the `level`-th derivative on every sample point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelLabels {
    pub level: usize,
    pub signs: Vec<Sign>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub order: usize,
    pub segments: usize,
    pub queries: u64,
}

#[derive(Debug, Clone)]
pub struct IterativeOutcome {
    pub labels: Vec<Sign>,
    /// All learned levels, index = derivative order.
    pub levels: Vec<LevelLabels>,
    /// One entry per level, from order `d-1` down to 0.
    pub trace: Vec<LevelTrace>,
}

/// Worst-case number of queries [`learn_all`] may spend:
/// `sum_{k=1..d} (k(k-1)/2 + 1) * (ceil(log2 n) + 2)`.
pub fn query_bound(d: usize, n: usize) -> u64 {
    let per_search = u64::from(ceil_log2(n)) + 2;
    (1..=d as u64).map(|k| k * (k - 1) / 2 + 1).sum::<u64>() * per_search
}

/// Upper bound on the number of segments at level `order` under degree bound `d`.
pub fn segment_bound(d: usize, order: usize) -> usize {
    let k = d - order;
    k * (k - 1) / 2 + 1
}

/// Splits `0..n` into maximal runs on which every level in `higher` is
/// constant.
pub fn partition_fixed_pattern(n: usize, higher: &[LevelLabels]) -> Vec<Segment> {
    if n == 0 {
        return Vec::new();
    }
    let mut segments = Vec::new();
    let mut lo = 0;
    for i in 1..n {
        if higher.iter().any(|lvl| lvl.signs[i] != lvl.signs[i - 1]) {
            segments.push(Segment { lo, hi: i - 1 });
            lo = i;
        }
    }
    segments.push(Segment { lo, hi: n - 1 });
    segments
}

/// Labels one monotone run at `order`.
///
/// `direction` is the sign of the next derivative on the run when known; it
/// rules out endpoint pairs that no monotone function could produce.
pub fn binary_search_segment<T: Scalar>(
    points: &[T],
    seg: Segment,
    order: usize,
    direction: Option<Sign>,
    oracle: &mut Oracle<T>,
) -> Result<Vec<Sign>, LearnError> {
    let (lo, hi) = (seg.lo, seg.hi);
    let first = oracle.query(&points[lo], order)?;
    if lo == hi {
        return Ok(vec![first]);
    }
    let last = oracle.query(&points[hi], order)?;
    if first == last {
        return Ok(vec![first; seg.len()]);
    }
    let impossible = match direction {
        Some(Sign::Pos) => first == Sign::Pos,
        Some(Sign::Neg) => first == Sign::Neg,
        None => false,
    };
    if impossible {
        return Err(LearnError::MonotonicityViolation { order, lo, hi });
    }
    // invariant: a carries `first`, b carries `last`
    let (mut a, mut b) = (lo, hi);
    while b - a > 1 {
        let mid = a + (b - a) / 2;
        if oracle.query(&points[mid], order)? == first {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut out = vec![first; a - lo + 1];
    out.resize(seg.len(), last);
    Ok(out)
}

/// Learns the labels of every point using derivative queries of orders
/// `0..d`. Never asks for the constant `d`-th derivative.
pub fn learn_all<T: Scalar>(
    points: &[T],
    d: usize,
    oracle: &mut Oracle<T>,
) -> Result<IterativeOutcome, LearnError> {
    if d == 0 {
        return Err(LearnError::InvalidParams("degree bound must be at least 1".into()));
    }
    let n = points.len();
    let mut levels: Vec<LevelLabels> = Vec::with_capacity(d);
    let mut trace = Vec::with_capacity(d);
    for order in (0..d).rev() {
        let before = oracle.ledger().total;
        // levels holds orders d-1, d-2, ..., order+1 in that sequence
        let segments = partition_fixed_pattern(n, &levels);
        let next = levels.last();
        let mut signs = Vec::with_capacity(n);
        for seg in &segments {
            let direction = next.map(|lvl| lvl.signs[seg.lo]);
            signs.extend(binary_search_segment(points, *seg, order, direction, oracle)?);
        }
        trace.push(LevelTrace {
            order,
            segments: segments.len(),
            queries: oracle.ledger().total - before,
        });
        levels.push(LevelLabels { level: order, signs });
    }
    levels.reverse();
    let labels = levels.first().map(|l| l.signs.clone()).unwrap_or_default();
    Ok(IterativeOutcome { labels, levels, trace })
}
