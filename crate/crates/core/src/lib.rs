//! Query-efficient perfect learning of univariate polynomial threshold
//! functions `x -> sign(f(x))`, with label and derivative-sign queries.
//!
//! * [`polynomial`]: exact and float polynomials, signs, sign patterns.
//! * [`oracle`]: the query oracle and its accounting.
//! * [`learner`]: the iterative, batch and average-case learners.
//! * [`distributions`]: random instances and entropy floors.
//! * [`adversarial`]: exact constructions showing when labels cannot be inferred.

pub mod adversarial;
pub mod distributions;
pub mod error;
pub mod learner;
pub mod oracle;
pub mod polynomial;
pub mod scalar;

pub use error::{DistError, LearnError, OracleError, PolyError, ScalarError, WitnessError};
pub use learner::Instance;
pub use oracle::{Oracle, QueryLedger, QuerySet};
pub use polynomial::{Polynomial, PolynomialRecord, Sign, SignPattern};
pub use scalar::{Backend, Scalar};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
