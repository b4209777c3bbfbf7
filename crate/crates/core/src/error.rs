//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsError {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),

    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unknown variable '{name}' at line {line}, column {col}")]
    UnknownVariable { name: String, line: usize, col: usize },

    #[error("nonlinear term (product of jet variables) at line {line}, column {col}")]
    NonlinearTerm { line: usize, col: usize },

    #[error("zero covector is not admissible")]
    ZeroCovector,

    #[error("covector is characteristic for the system")]
    CharacteristicCovector,

    #[error("genericity budget exhausted after {0} attempts")]
    GenericityBudgetExhausted(usize),

    #[error("symbol family window too small: {0}")]
    WindowTooSmall(String),

    #[error("cohomology table not stabilized within the window: {0}")]
    NotStabilized(String),

    #[error("symbol is not involutive at degree {0}")]
    NotInvolutive(usize),

    #[error("zero rank")]
    ZeroRank,

    #[error("candidate is not a sub-ideal of the system: {0}")]
    NotSubIdeal(String),

    #[error("basis polynomials are linearly dependent")]
    DependentBasis,

    #[error("space is not closed under differentiation")]
    NotDStable,

    #[error("unknown catalog entry '{0}'")]
    UnknownCatalogEntry(String),

    #[error("invalid parameters for catalog entry '{name}': {msg}")]
    InvalidCatalogParams { name: String, msg: String },

    #[error("linearization has zero linear part")]
    DegenerateLinearization,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
