//! Experiment runner for the `ptf-lab` learners: sweeps, per-trial CSV
//! records, aggregate JSON, lower-bound verification and entropy floors.

pub mod config;
pub mod entropy;
pub mod experiment;
pub mod lower_bounds;

use ptf_lab::learner::ceil_log2;
use ptf_lab::learner::iterative::query_bound;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{Cell, ExperimentConfig, Learner, ModelKind};
pub use entropy::{compare_entropy, EntropyReport};
pub use experiment::{run, ExperimentResult, TrialRecord};
pub use lower_bounds::{default_grid, verify_lower_bounds, GridEntry, LowerBoundReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Learn(#[from] ptf_lab::LearnError),
    #[error(transparent)]
    Dist(#[from] ptf_lab::DistError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundRow {
    pub d: usize,
    pub n: usize,
    pub log2_n: u32,
    /// Segments summed over all levels.
    pub segments: u64,
    pub queries: u64,
}

/// The iterative learner's worst-case query count for each `(d, n)`.
pub fn print_bounds(ds: &[usize], ns: &[usize]) -> Vec<BoundRow> {
    ds.iter()
        .flat_map(|&d| {
            ns.iter().map(move |&n| BoundRow {
                d,
                n,
                log2_n: ceil_log2(n),
                segments: (1..=d as u64).map(|k| k * (k - 1) / 2 + 1).sum(),
                queries: query_bound(d, n),
            })
        })
        .collect()
}
