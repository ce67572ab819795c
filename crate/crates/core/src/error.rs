use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("envelope not tempered: {0}")]
    NotTempered(String),
    #[error("integral of the envelope against the growth function diverges: {0}")]
    Divergent(String),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("envelope has zero mass on a cell where its supremum is positive: {0}")]
    EmptyCell(String),
    #[error("class membership fails: {0}")]
    Membership(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
