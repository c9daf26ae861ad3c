use std::fs;
use std::path::Path;

use ptf_lab::adversarial::{
    check_missing_derivative_conditions, interval_witness, linear_lower_witness, missing_derivative_witness,
    multivariate_witness, Witness, DEFAULT_BIT_BUDGET,
};
use ptf_lab::Rational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
pub enum GridEntry {
    Interval { n: usize },
    MissingDerivative { d: usize, n: usize },
    Linear { roots: Vec<i64> },
    Multivariate { n: usize },
}

impl GridEntry {
    pub fn label(&self) -> String {
        match self {
            GridEntry::Interval { n } => format!("interval n={n}"),
            GridEntry::MissingDerivative { d, n } => format!("missing_derivative d={d} n={n}"),
            GridEntry::Linear { roots } => format!("linear d={} roots={roots:?}", roots.len()),
            GridEntry::Multivariate { n } => format!("multivariate n={n}"),
        }
    }

    fn file_stem(&self) -> String {
        match self {
            GridEntry::Interval { n } => format!("interval_n{n}"),
            GridEntry::MissingDerivative { d, n } => format!("missing_derivative_d{d}_n{n}"),
            GridEntry::Linear { roots } => format!("linear_d{}", roots.len()),
            GridEntry::Multivariate { n } => format!("multivariate_n{n}"),
        }
    }
}

/// interval n=20; missing derivative d in 3..=5, n in 2..=5; linear d in 2..=5;
/// multivariate n in {2, 10, 32}.
pub fn default_grid() -> Vec<GridEntry> {
    let mut g = vec![GridEntry::Interval { n: 20 }];
    for d in 3..=5 {
        for n in 2..=5 {
            g.push(GridEntry::MissingDerivative { d, n });
        }
    }
    g.push(GridEntry::Linear { roots: vec![-2, -1] });
    g.push(GridEntry::Linear { roots: vec![-3, -2, -1] });
    g.push(GridEntry::Linear { roots: vec![-4, -3, -2, -1] });
    g.push(GridEntry::Linear { roots: vec![-6, -5, -4, -3, -2] });
    for n in [2, 10, 32] {
        g.push(GridEntry::Multivariate { n });
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub entry: GridEntry,
    pub passed: bool,
    pub detail: String,
    /// Points the restricted rule recovers from the rest (univariate only);
    /// a sound witness has none.
    pub inferable: Vec<usize>,
    #[serde(skip)]
    pub fixture: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub entries: Vec<EntryReport>,
}

impl LowerBoundReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    /// Writes one JSON fixture per passing entry into `dir`.
    pub fn write_fixtures(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        for e in &self.entries {
            if let Some(v) = &e.fixture {
                let path = dir.join(format!("{}.json", e.entry.file_stem()));
                fs::write(path, serde_json::to_string_pretty(v)? + "\n")?;
            }
        }
        Ok(())
    }
}

fn univariate(entry: &GridEntry, w: Result<Witness, ptf_lab::WitnessError>, extra: Option<fn(&Witness) -> Result<(), ptf_lab::WitnessError>>) -> EntryReport {
    let fail = |detail: String| EntryReport {
        entry: entry.clone(),
        passed: false,
        detail,
        inferable: Vec::new(),
        fixture: None,
    };
    let w = match w {
        Ok(w) => w,
        Err(e) => return fail(e.to_string()),
    };
    if let Err(e) = w.verify() {
        return fail(e.to_string());
    }
    if let Some(check) = extra {
        if let Err(e) = check(&w) {
            return fail(e.to_string());
        }
    }
    let inferable = w.restricted_inferable();
    let passed = inferable.is_empty();
    let mut detail = format!(
        "{} points, {} alternatives, orders {:?}",
        w.points.len(),
        w.alternatives.len(),
        w.query_orders
    );
    if let Some(eps) = &w.epsilon {
        detail.push_str(&format!(", eps = {eps}"));
    }
    if !passed {
        detail.push_str(&format!(", restricted rule infers {inferable:?}"));
    }
    EntryReport { entry: entry.clone(), passed, detail, inferable, fixture: serde_json::to_value(&w).ok() }
}

pub fn verify_entry(entry: &GridEntry) -> EntryReport {
    match entry {
        GridEntry::Interval { n } => univariate(entry, interval_witness(*n), None),
        GridEntry::MissingDerivative { d, n } => univariate(
            entry,
            missing_derivative_witness(*d, *n, DEFAULT_BIT_BUDGET),
            Some(check_missing_derivative_conditions),
        ),
        GridEntry::Linear { roots } => {
            let roots: Vec<Rational> = roots.iter().map(|&r| Rational::from_integer(r.into())).collect();
            univariate(entry, linear_lower_witness(&roots), None)
        }
        GridEntry::Multivariate { n } => match multivariate_witness(*n) {
            Ok(r) => EntryReport {
                entry: entry.clone(),
                passed: true,
                detail: format!(
                    "c1 = {:.4}, c2 = {:.3}, base {}, {} alternatives certified",
                    r.c1,
                    r.c2,
                    r.base_choice,
                    r.certified.len()
                ),
                inferable: Vec::new(),
                fixture: serde_json::to_value(&r).ok(),
            },
            Err(e) => EntryReport {
                entry: entry.clone(),
                passed: false,
                detail: e.to_string(),
                inferable: Vec::new(),
                fixture: None,
            },
        },
    }
}

pub fn verify_lower_bounds(grid: &[GridEntry]) -> LowerBoundReport {
    LowerBoundReport { entries: grid.par_iter().map(verify_entry).collect() }
}
