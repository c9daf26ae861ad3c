use std::collections::BTreeMap;
use std::path::Path;

use ptf_lab::distributions::{
    entropy_lower_bound_dirichlet, entropy_lower_bound_uniform, entropy_surrogate_dirichlet,
};
use serde::{Deserialize, Serialize};

use crate::experiment::{Summary, TrialRecord};
use crate::HarnessError;

/// The columns of a result row that the entropy comparison reads.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct QueryRow {
    pub learner: String,
    pub d: u64,
    pub n: u64,
    pub alpha: Option<f64>,
    pub model: String,
    pub queries_total: u64,
    pub correct: bool,
}

impl From<&TrialRecord> for QueryRow {
    fn from(r: &TrialRecord) -> Self {
        QueryRow {
            learner: r.learner.to_string(),
            d: r.d as u64,
            n: r.n as u64,
            alpha: r.alpha,
            model: r.model.clone(),
            queries_total: r.queries_total,
            correct: r.correct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `log2 C(n + d, d)`.
    Uniform,
    /// Exact Dirichlet-multinomial entropy.
    DirichletExact,
    /// `(d - 1) log2 n`; reported, never asserted.
    DirichletSurrogate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyCell {
    pub learner: String,
    pub model: String,
    pub d: u64,
    pub n: u64,
    pub alpha: Option<f64>,
    pub trials: usize,
    pub queries: Option<Summary>,
    pub bound: f64,
    pub kind: BoundKind,
    /// `log2 C(n + d, d)` for every cell, whatever its model.
    pub uniform_bound: f64,
    pub passed: bool,
}

impl EntropyCell {
    /// Whether the mean clears `bound - 3 stderr`.
    pub fn clears(&self, bound: f64) -> bool {
        self.queries.is_some_and(|q| q.mean >= bound - 3.0 * q.stderr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub cells: Vec<EntropyCell>,
}

impl EntropyReport {
    pub fn offending(&self) -> Vec<&EntropyCell> {
        self.cells.iter().filter(|c| !c.passed).collect()
    }

    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.passed)
    }
}

type Key = (String, String, u64, u64, Option<u64>);

/// Groups Sample and Search rows by `(model, d, n, alpha)` and compares each
/// cell's mean query count with the entropy floor of its instance law.
pub fn compare_rows(rows: &[QueryRow]) -> Result<EntropyReport, HarnessError> {
    let mut groups: BTreeMap<Key, Vec<&QueryRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.learner == "sample_search") {
        let key = (r.learner.clone(), r.model.clone(), r.d, r.n, r.alpha.map(f64::to_bits));
        groups.entry(key).or_default().push(r);
    }
    let mut cells = Vec::new();
    for ((learner, model, d, n, alpha_bits), rs) in groups {
        let alpha = alpha_bits.map(f64::from_bits);
        let queries = if rs.iter().all(|r| r.correct) {
            Summary::of(&rs.iter().map(|r| r.queries_total as f64).collect::<Vec<_>>())
        } else {
            None
        };
        let uniform_bound = entropy_lower_bound_uniform(n, d);
        let (bound, kind) = match (model.as_str(), alpha) {
            ("dirichlet", Some(a)) => match entropy_lower_bound_dirichlet(n, d, a) {
                Ok(h) => (h, BoundKind::DirichletExact),
                Err(ptf_lab::DistError::ComputationTooLarge { .. }) => {
                    (entropy_surrogate_dirichlet(n, d), BoundKind::DirichletSurrogate)
                }
                Err(e) => return Err(e.into()),
            },
            ("uniform", _) => (uniform_bound, BoundKind::Uniform),
            (other, _) => return Err(HarnessError::Config(format!("cannot bound model {other:?}"))),
        };
        let mut cell = EntropyCell {
            learner,
            model,
            d,
            n,
            alpha,
            trials: rs.len(),
            queries,
            bound,
            kind,
            uniform_bound,
            passed: false,
        };
        cell.passed = kind == BoundKind::DirichletSurrogate && queries.is_some() || cell.clears(bound);
        cells.push(cell);
    }
    Ok(EntropyReport { cells })
}

pub fn compare_records(records: &[TrialRecord]) -> Result<EntropyReport, HarnessError> {
    compare_rows(&records.iter().map(QueryRow::from).collect::<Vec<_>>())
}

/// Reads result CSVs written by `run` and compares them.
pub fn compare_entropy<P: AsRef<Path>>(files: &[P]) -> Result<EntropyReport, HarnessError> {
    let mut rows = Vec::new();
    for f in files {
        let mut rdr = csv::Reader::from_path(f.as_ref())?;
        for row in rdr.deserialize() {
            rows.push(row?);
        }
    }
    compare_rows(&rows)
}
