use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A variable, open set, or state was used outside the structure that defines it.
    #[error("domain error: {0}")]
    Domain(String),
    /// A raw column sequence violates the componentwise proset order.
    #[error("chain violation: {0}")]
    ChainViolation(String),
    /// Concatenation endpoints do not match, or an operand is empty.
    #[error("composition undefined: {0}")]
    CompositionUndefined(String),
    /// Gluing operands disagree on their overlap.
    #[error("gluing precondition failed: {0}")]
    GluePrecondition(String),
    /// A spec file failed schema or invariant validation.
    #[error("spec file error: {0}")]
    SpecFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
