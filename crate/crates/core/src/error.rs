use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration refused: C({p}, <= {k}) = {count} supports exceeds the limit of {limit}")]
    EnumerationTooLarge {
        p: usize,
        k: usize,
        count: u128,
        limit: u128,
    },

    #[error("factorization failed: {0}")]
    Factorization(&'static str),

    #[error("empty regularization path")]
    EmptyPath,
}

pub type Result<T> = std::result::Result<T, Error>;
