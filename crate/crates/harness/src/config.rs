use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ptf_lab::distributions::RootModel;
use ptf_lab::Backend;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    Iterative,
    Batch,
    SampleSearch,
}

impl Learner {
    pub fn as_str(self) -> &'static str {
        match self {
            Learner::Iterative => "iterative",
            Learner::Batch => "batch",
            Learner::SampleSearch => "sample_search",
        }
    }
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Learner {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iterative" => Ok(Learner::Iterative),
            "batch" => Ok(Learner::Batch),
            "sample_search" | "sample-search" => Ok(Learner::SampleSearch),
            other => Err(HarnessError::Config(format!("unknown learner {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Uniform,
    Dirichlet,
}

impl FromStr for ModelKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(ModelKind::Uniform),
            "dirichlet" => Ok(ModelKind::Dirichlet),
            other => Err(HarnessError::Config(format!("unknown root model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub learner: Learner,
    pub d: Vec<usize>,
    pub n: Vec<usize>,
    /// Batch exponents; used by the batch learner only.
    #[serde(default)]
    pub alpha: Vec<f64>,
    pub model: ModelKind,
    /// Dirichlet concentrations; used when `model` is Dirichlet.
    #[serde(default)]
    pub dirichlet_alpha: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub backend: Backend,
    /// Draw the leading sign of each hidden polynomial at random instead of `+`.
    #[serde(default)]
    pub random_leading: bool,
    /// Record wall-clock time per trial. Off makes the CSV bit-reproducible.
    #[serde(default = "yes")]
    pub timing: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

/// One `(d, n, parameter)` combination of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub d: usize,
    pub n: usize,
    /// Batch alpha or Dirichlet alpha, whichever the learner uses.
    pub alpha: Option<f64>,
    pub model: RootModel,
}

impl ExperimentConfig {
    pub fn new(learner: Learner, d: Vec<usize>, n: Vec<usize>) -> Self {
        ExperimentConfig {
            learner,
            d,
            n,
            alpha: Vec::new(),
            model: ModelKind::Uniform,
            dirichlet_alpha: Vec::new(),
            trials: 1,
            master_seed: 0,
            backend: Backend::Float,
            random_leading: false,
            timing: true,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.d.is_empty() || self.n.is_empty() {
            return bad("d and n sweep lists must be non-empty");
        }
        if self.d.contains(&0) || self.n.contains(&0) {
            return bad("d and n must be positive");
        }
        if self.learner == Learner::Batch && self.alpha.is_empty() {
            return bad("the batch learner needs at least one --alpha");
        }
        if self.model == ModelKind::Dirichlet && self.dirichlet_alpha.is_empty() {
            return bad("the dirichlet model needs at least one --dirichlet-alpha");
        }
        if self.trials as u64 > u32::MAX as u64 {
            return bad("too many trials");
        }
        Ok(())
    }

    /// Cells in sweep order: `d` outermost, then `n`, then the parameter list.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &d in &self.d {
            for &n in &self.n {
                let params: Vec<(Option<f64>, RootModel)> = match (self.learner, self.model) {
                    (Learner::Batch, _) => self.alpha.iter().map(|&a| (Some(a), self.root_model(d))).collect(),
                    (_, ModelKind::Dirichlet) => self
                        .dirichlet_alpha
                        .iter()
                        .map(|&a| (Some(a), RootModel::Dirichlet { d, alpha: a }))
                        .collect(),
                    (_, ModelKind::Uniform) => vec![(None, RootModel::Uniform { d })],
                };
                for (alpha, model) in params {
                    out.push(Cell { index: out.len(), d, n, alpha, model });
                }
            }
        }
        out
    }

    fn root_model(&self, d: usize) -> RootModel {
        match self.model {
            ModelKind::Dirichlet => RootModel::Dirichlet { d, alpha: self.dirichlet_alpha[0] },
            ModelKind::Uniform => RootModel::Uniform { d },
        }
    }
}
