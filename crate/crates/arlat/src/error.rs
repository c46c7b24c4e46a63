use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("operands belong to different contexts")]
    ContextMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("element is not a unit")]
    NonUnit,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("not an idempotent: {0}")]
    NotIdempotent(String),
    #[error("algorithm failure: {0}")]
    AlgorithmFailure(String),
    #[error("decomposition pattern did not stabilize")]
    StabilizationFailure,
    #[error("input lattice is projective")]
    ProjectiveInput,
    #[error("M ⊗ K is not projective")]
    PropertyStarFails,
    #[error("endomorphism ring is not local")]
    NotLocal,
    #[error("no φ found outside the factor-through space")]
    NoPhiExists,
    #[error("certification failed: {0}")]
    CertificationFailure(String),
    #[error("vertex budget exceeded ({0})")]
    BudgetExceeded(usize),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
