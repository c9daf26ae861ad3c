//! Sample and Search: label-only learner for random instances.
//!
//! Phase 1 probes uniformly random unqueried points until either every point
//! is queried or the probed labels, read in sorted order, change sign as many
//! times as the hidden polynomial has roots. Every root is then bracketed by
//! two adjacent probes, and phase 2 binary-searches each bracket. All other
//! points take the label of their neighbouring probes.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DistError, LearnError};
use crate::oracle::Oracle;
use crate::polynomial::Sign;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Every point was probed.
    Exhausted,
    /// All sign flips were found before running out of points.
    AllFlips,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Exhausted => "exhausted",
            Termination::AllFlips => "all_flips",
        }
    }
}

/// Probed labels keyed by point index, plus the number of sign changes
/// between consecutive probes.
#[derive(Debug, Clone, Default)]
pub struct ProbeState {
    queried: BTreeMap<usize, Sign>,
    flips: usize,
}

impl ProbeState {
    pub fn insert(&mut self, index: usize, sign: Sign) {
        let prev = self.queried.range(..index).next_back().map(|(_, &s)| s);
        let next = self.queried.range(index + 1..).next().map(|(_, &s)| s);
        let changed = |a: Option<Sign>, b: Option<Sign>| matches!((a, b), (Some(a), Some(b)) if a != b);
        self.flips = self.flips + usize::from(changed(prev, Some(sign))) + usize::from(changed(Some(sign), next))
            - usize::from(changed(prev, next));
        self.queried.insert(index, sign);
    }

    pub fn flips(&self) -> usize {
        self.flips
    }

    pub fn len(&self) -> usize {
        self.queried.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queried.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Sign)> + '_ {
        self.queried.iter().map(|(&i, &s)| (i, s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvgCaseResult {
    /// Phase-1 probes.
    pub z: u64,
    pub search_queries: u64,
    pub total: u64,
    pub termination: Termination,
    pub labels: Vec<Sign>,
    /// Point indices probed in phase 1, in probe order.
    pub probes: Vec<usize>,
}

/// Runs Sample and Search with label queries only. `roots` is the number of
/// distinct real roots of the hidden polynomial.
pub fn sample_and_search<T: Scalar, R: Rng + ?Sized>(
    points: &[T],
    oracle: &mut Oracle<T>,
    roots: usize,
    rng: &mut R,
) -> Result<AvgCaseResult, LearnError> {
    let n = points.len();
    let mut state = ProbeState::default();
    // partial Fisher-Yates: order[..probed] are the probes so far
    let mut order: Vec<usize> = (0..n).collect();
    let mut probed = 0;
    while probed < n && (roots == 0 || state.flips() < roots) {
        let j = rng.random_range(probed..n);
        order.swap(probed, j);
        let idx = order[probed];
        probed += 1;
        let s = oracle.query(&points[idx], 0)?;
        state.insert(idx, s);
        if state.flips() > roots {
            return Err(LearnError::DegreeViolation { observed: state.flips(), allowed: roots });
        }
    }
    let z = probed as u64;
    order.truncate(probed);

    let mut labels: Vec<Option<Sign>> = vec![None; n];
    let mut search_queries = 0u64;
    let termination = if probed == n { Termination::Exhausted } else { Termination::AllFlips };

    let probes: Vec<(usize, Sign)> = state.iter().collect();
    for &(i, s) in &probes {
        labels[i] = Some(s);
    }
    if let (Some(&(first, s_first)), Some(&(last, s_last))) = (probes.first(), probes.last()) {
        labels[..first].fill(Some(s_first));
        labels[last + 1..].fill(Some(s_last));
    }
    for w in probes.windows(2) {
        let ((a, sa), (b, sb)) = (w[0], w[1]);
        if sa == sb {
            labels[a + 1..b].fill(Some(sa));
            continue;
        }
        // exactly one boundary in (a, b); lo keeps sa, hi keeps sb
        let (mut lo, mut hi) = (a, b);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            search_queries += 1;
            if oracle.query(&points[mid], 0)? == sa {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        labels[a + 1..=lo].fill(Some(sa));
        labels[hi..b].fill(Some(sb));
    }

    Ok(AvgCaseResult {
        z,
        search_queries,
        total: z + search_queries,
        termination,
        labels: labels.into_iter().map(|l| l.expect("every point labelled")).collect(),
        probes: order,
    })
}

/// Draws from the categorical distribution `gaps` until every category has
/// appeared, and returns the number of draws capped at `n`.
pub fn capped_coupon_statistic<R: Rng + ?Sized>(
    gaps: &[f64],
    n: u64,
    rng: &mut R,
) -> Result<u64, DistError> {
    let sum: f64 = gaps.iter().sum();
    if gaps.is_empty() || gaps.iter().any(|&g| !(g >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
        return Err(DistError::InvalidDistribution { sum });
    }
    let cdf: Vec<f64> = gaps
        .iter()
        .scan(0.0, |acc, &g| {
            *acc += g;
            Some(*acc)
        })
        .collect();
    let needed = gaps.iter().filter(|&&g| g > 0.0).count();
    let mut seen = vec![false; gaps.len()];
    let mut distinct = 0;
    let mut draws = 0;
    while distinct < needed && draws < n {
        draws += 1;
        let u: f64 = rng.random::<f64>() * sum;
        let c = cdf.partition_point(|&p| p <= u).min(gaps.len() - 1);
        if !seen[c] {
            seen[c] = true;
            distinct += 1;
        }
    }
    Ok(draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::ceil_log2;
    use crate::oracle::QuerySet;
    use crate::polynomial::Polynomial;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use Sign::*;

    #[test]
    fn flip_bookkeeping() {
        let mut st = ProbeState::default();
        st.insert(5, Pos);
        assert_eq!(st.flips(), 0);
        st.insert(9, Neg);
        assert_eq!(st.flips(), 1);
        st.insert(7, Neg);
        assert_eq!(st.flips(), 1);
        st.insert(6, Pos);
        assert_eq!(st.flips(), 1);
        st.insert(1, Neg);
        assert_eq!(st.flips(), 2);
        st.insert(8, Pos);
        assert_eq!(st.flips(), 4);
    }

    #[test]
    fn no_roots_probes_everything() {
        let pts: Vec<f64> = (0..50).map(|i| i as f64 / 50.0).collect();
        let f = Polynomial::from_i64s(&[1, 0, 1]);
        let mut o = Oracle::new(f, QuerySet::labels_only(2));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = sample_and_search(&pts, &mut o, 0, &mut rng).unwrap();
        assert_eq!(r.z, 50);
        assert_eq!(r.termination, Termination::Exhausted);
        assert_eq!(r.labels, vec![Pos; 50]);
        let mut sorted = r.probes.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn two_point_threshold() {
        let pts = [0.1, 0.9];
        let f = Polynomial::from_roots(&[0.5], Pos).unwrap();
        let mut o = Oracle::new(f, QuerySet::labels_only(1));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = sample_and_search(&pts, &mut o, 1, &mut rng).unwrap();
        assert_eq!(r.z, 2);
        assert_eq!(r.search_queries, 0);
        assert_eq!(r.labels, vec![Neg, Pos]);
    }

    #[test]
    fn too_many_flips_is_reported() {
        let pts: Vec<f64> = (0..40).map(|i| i as f64 / 40.0).collect();
        let f = Polynomial::from_roots(&[0.2, 0.5, 0.8], Pos).unwrap();
        let mut o = Oracle::new(f, QuerySet::labels_only(3));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let err = sample_and_search(&pts, &mut o, 0, &mut rng).unwrap_err();
        assert!(matches!(err, LearnError::DegreeViolation { allowed: 0, .. }));
    }

    #[test]
    fn coupon_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(capped_coupon_statistic(&[1.0], 1000, &mut rng), Ok(1));
        assert_eq!(capped_coupon_statistic(&[0.5, 0.5], 1, &mut rng), Ok(1));
        assert!(capped_coupon_statistic(&[0.5, 0.6], 10, &mut rng).is_err());
        assert!(capped_coupon_statistic(&[], 10, &mut rng).is_err());
        for _ in 0..100 {
            let y = capped_coupon_statistic(&[0.25; 4], 1_000_000, &mut rng).unwrap();
            assert!(y >= 4);
        }
    }

    #[test]
    fn labels_and_accounting() {
        let n = 4096;
        let pts: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let f = Polynomial::from_roots(&[0.11, 0.42, 0.43, 0.9], Pos).unwrap();
        for seed in 0..50 {
            let mut o = Oracle::new(f.clone(), QuerySet::labels_only(4));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = sample_and_search(&pts, &mut o, 4, &mut rng).unwrap();
            assert_eq!(r.labels, o.reveal_labels(&pts));
            assert_eq!(r.total, o.ledger().total);
            assert_eq!(r.z as usize, r.probes.len());
            assert!(r.search_queries <= 4 * (u64::from(ceil_log2(n)) + 2));
        }
    }
}
