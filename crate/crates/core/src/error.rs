use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("cannot parse scalar from {0}")]
    Parse(String),
    #[error("unknown backend {0:?} (expected \"exact\" or \"float\")")]
    UnknownBackend(String),
    #[error("backend mismatch: expected {expected}, found {found}")]
    BackendMismatch { expected: String, found: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("roots must be distinct; root {index} repeats its predecessor")]
    DuplicateRoots { index: usize },
    #[error("roots must be sorted increasingly; violation at index {index}")]
    UnsortedRoots { index: usize },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("query order {order} is not in the allowed query set")]
    DisallowedOrder { order: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("order-{order} signs on points {lo}..={hi} are not consistent with a monotone piece")]
    MonotonicityViolation { order: usize, lo: usize, hi: usize },
    #[error("observed {observed} sign flips but the hidden polynomial has only {allowed} roots")]
    DegreeViolation { observed: usize, allowed: usize },
    #[error("coverage loop exceeded {limit} batches in iteration {iteration}")]
    NonTermination { iteration: usize, limit: usize },
    #[error("invalid batch parameters: {0}")]
    InvalidParams(String),
    #[error("points must be strictly increasing (violation at index {0})")]
    UnsortedPoints(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("probabilities must be non-negative and sum to 1 (sum = {sum})")]
    InvalidDistribution { sum: f64 },
    #[error("Dirichlet concentration must be positive, got {0}")]
    InvalidAlpha(f64),
    #[error("exact computation needs {needed} terms, above the limit {limit}")]
    ComputationTooLarge { needed: f64, limit: f64 },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("alternative for point {point} disagrees with the base at point {other}, order {order}")]
    Agreement { point: usize, other: usize, order: usize },
    #[error("alternative for point {point} does not flip its label")]
    NoFlip { point: usize },
    #[error("construction condition failed: {0}")]
    Condition(String),
    #[error("intermediate value needs {bits} bits, above the budget of {budget}")]
    SizeLimit { bits: u64, budget: u64 },
    #[error("no valid epsilon after {0} halvings")]
    EpsilonSearchFailed(usize),
    #[error("{quantity} = {value:e} lies within tolerance {tolerance:e} of zero")]
    ToleranceBreach { quantity: String, value: f64, tolerance: f64 },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
