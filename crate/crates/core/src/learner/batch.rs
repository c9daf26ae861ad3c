//! Round-efficient batch learner built on the restricted inference rule.
//!
//! The rule: if two queried points are adjacent among the queried set and
//! carry identical full sign patterns (orders `0..d`), every derivative up to
//! the labels is monotone between them, so each point strictly between them
//! shares their label.
//!
//! The learner runs a bounded number of iterations. Each iteration draws
//! random batches from the still-unlabelled points until one batch covers a
//! `(m - 2k)/m` fraction of them, then drops everything it covered. Once at
//! most `m` points remain they are all queried in a final batch.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::LearnError;
use crate::oracle::Oracle;
use crate::polynomial::{Sign, SignPattern};
use crate::scalar::Scalar;

/// Cap on coverage-loop batches per iteration: 64 times the expected count of 2.
pub const MAX_BATCHES_PER_ITERATION: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchParams {
    pub d: usize,
    pub n: usize,
    pub alpha: Option<f64>,
    /// Inference dimension used by the analysis, `d^2 + d + 3`.
    pub k: usize,
    /// Batch size.
    pub m: usize,
    /// Iteration cutoff, `ceil(ln n / ln(m / 2k))`.
    pub t: usize,
}

pub fn inference_dimension(d: usize) -> usize {
    d * d + d + 3
}

impl BatchParams {
    /// `m = ceil(2k n^alpha)`, for `alpha` in `(1/log2 n, 1]`.
    pub fn new(d: usize, n: usize, alpha: f64) -> Result<Self, LearnError> {
        if n < 2 {
            return Err(LearnError::InvalidParams(format!("n = {n} is too small")));
        }
        let lower = 1.0 / (n as f64).log2();
        if !(alpha > lower && alpha <= 1.0) {
            return Err(LearnError::InvalidParams(format!(
                "alpha = {alpha} outside ({lower:.4}, 1]"
            )));
        }
        let k = inference_dimension(d);
        let m = (2.0 * k as f64 * (n as f64).powf(alpha)).ceil() as usize;
        let mut p = Self::with_batch_size(d, n, m)?;
        p.alpha = Some(alpha);
        Ok(p)
    }

    /// Explicit batch size; requires `m > 2k`.
    pub fn with_batch_size(d: usize, n: usize, m: usize) -> Result<Self, LearnError> {
        let k = inference_dimension(d);
        if m <= 2 * k {
            return Err(LearnError::InvalidParams(format!("batch size {m} must exceed 2k = {}", 2 * k)));
        }
        let ratio = m as f64 / (2 * k) as f64;
        // the epsilon keeps exact integer ratios such as ln(10^4)/ln(100) from rounding up
        let t = ((n.max(2) as f64).ln() / ratio.ln() - 1e-9).ceil().max(1.0) as usize;
        Ok(BatchParams { d, n, alpha: None, k, m, t })
    }

    /// Coverage a batch must reach before an iteration ends.
    pub fn coverage_target(&self) -> f64 {
        (self.m - 2 * self.k) as f64 / self.m as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueriedPoint<T> {
    pub x: T,
    pub pattern: SignPattern,
}

/// Labels implied by the restricted rule for each target.
///
/// Returns `(target index, label)` for every target lying strictly between
/// two queried neighbours whose patterns are identical and full, i.e. cover
/// at least orders `0..d`. Shorter patterns never certify anything, since
/// the monotonicity argument needs every non-constant derivative. A target
/// equal to a queried point is reported with that point's label.
pub fn restricted_infer<T: Scalar>(
    queried: &[QueriedPoint<T>],
    targets: &[T],
    d: usize,
) -> Vec<(usize, Sign)> {
    let mut out = Vec::new();
    let mut q = 0;
    for (ti, x) in targets.iter().enumerate() {
        while q < queried.len() && queried[q].x < *x {
            q += 1;
        }
        // queried[q-1].x < x <= queried[q].x
        if q < queried.len() && queried[q].x == *x {
            if let Some(label) = queried[q].pattern.label() {
                out.push((ti, label));
            }
            continue;
        }
        if q == 0 || q == queried.len() {
            continue;
        }
        let (a, b) = (&queried[q - 1].pattern, &queried[q].pattern);
        if a.len() >= d.max(1) && a == b {
            if let Some(label) = a.label() {
                out.push((ti, label));
            }
        }
    }
    out
}

/// Fraction of `remaining` whose label follows from `queried`; 1 when empty.
pub fn coverage<T: Scalar>(queried: &[QueriedPoint<T>], remaining: &[T], d: usize) -> f64 {
    if remaining.is_empty() {
        return 1.0;
    }
    restricted_infer(queried, remaining, d).len() as f64 / remaining.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchOutcome {
    pub labels: Vec<Sign>,
    /// Coverage-loop batches per iteration.
    pub batches_per_iteration: Vec<usize>,
    pub final_batch: bool,
}

impl BatchOutcome {
    pub fn loop_batches(&self) -> usize {
        self.batches_per_iteration.iter().sum()
    }
}

/// Labels all points. The final exhaustive batch asks for labels only.
pub fn batch_klmz<T: Scalar, R: Rng + ?Sized>(
    points: &[T],
    oracle: &mut Oracle<T>,
    params: &BatchParams,
    rng: &mut R,
) -> Result<BatchOutcome, LearnError> {
    let d = params.d;
    let mut labels: Vec<Option<Sign>> = vec![None; points.len()];
    // indices of points not yet labelled, kept sorted
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut batches_per_iteration = Vec::new();
    let target = params.coverage_target();

    for iteration in 0..params.t {
        if remaining.len() <= params.m {
            break;
        }
        let remaining_x: Vec<T> = remaining.iter().map(|&i| points[i].clone()).collect();
        let mut batches = 0;
        let inferred = loop {
            if batches == MAX_BATCHES_PER_ITERATION {
                return Err(LearnError::NonTermination {
                    iteration,
                    limit: MAX_BATCHES_PER_ITERATION,
                });
            }
            batches += 1;
            // positions into `remaining`, drawn with replacement
            let mut sample: Vec<usize> =
                (0..params.m).map(|_| rng.random_range(0..remaining.len())).collect();
            sample.sort_unstable();
            sample.dedup();
            let xs: Vec<&T> = sample.iter().map(|&p| &points[remaining[p]]).collect();
            let patterns = oracle.full_pattern_batch(&xs)?;
            let queried: Vec<QueriedPoint<T>> = sample
                .iter()
                .zip(patterns)
                .map(|(&p, pattern)| {
                    labels[remaining[p]] = pattern.label();
                    QueriedPoint { x: points[remaining[p]].clone(), pattern }
                })
                .collect();
            let inferred = restricted_infer(&queried, &remaining_x, d);
            if inferred.len() as f64 / remaining.len() as f64 >= target {
                break inferred;
            }
        };
        batches_per_iteration.push(batches);
        for (pos, label) in inferred {
            labels[remaining[pos]] = Some(label);
        }
        remaining.retain(|&i| labels[i].is_none());
    }

    let final_batch = !remaining.is_empty();
    if final_batch {
        let reqs: Vec<(&T, usize)> = remaining.iter().map(|&i| (&points[i], 0)).collect();
        let answers = oracle.query_batch(&reqs)?;
        for (&i, s) in remaining.iter().zip(answers) {
            labels[i] = Some(s);
        }
    }

    Ok(BatchOutcome {
        labels: labels.into_iter().map(|l| l.expect("every point labelled")).collect(),
        batches_per_iteration,
        final_batch,
    })
}
