use thiserror::Error;

/// Errors surfaced by the exact-arithmetic layers.
///
/// The variants are grouped by how the CLI maps them to exit codes:
/// usage/validation/schema problems are caller mistakes, precision
/// exhaustion means the requested computation cannot be certified at the
/// supplied working precision (never silently approximated).
#[derive(Debug, Error)]
pub enum Error {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("cannot invert a value indistinguishable from zero at the working precision")]
    InvertZero,

    #[error("insufficient precision: need {needed} p-adic digits, have {available}")]
    Precision { needed: i64, available: i64 },

    #[error("torsion certificate failed: determinant is zero at the working precision")]
    TorsionUncertifiable,

    #[error("Weierstrass preparation uncertifiable: {0}")]
    Uncertifiable(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
