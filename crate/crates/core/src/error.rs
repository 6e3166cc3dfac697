use thiserror::Error;

use crate::subspace::Signature;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector is not null (relative nullity residual {residual:e})")]
    NotNull { residual: f64 },

    #[error("plane normal is not a unit vector (|n| = {norm})")]
    NonUnitNormal { norm: f64 },

    #[error("rank deficient input: expected rank {expected}, found {found}")]
    RankDeficient { expected: usize, found: usize },

    #[error("wrong signature: expected {expected}, found {found}")]
    WrongSignature {
        expected: Signature,
        found: Signature,
    },

    #[error("grid shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("degenerate configuration: {what} at {location}")]
    Degenerate { what: String, location: String },

    #[error("{what} = {value:e} exceeds tolerance {tol:e}")]
    Tolerance { what: String, value: f64, tol: f64 },

    #[error("channel criteria disagree: {0}")]
    CriteriaDisagree(String),
}

impl Error {
    pub(crate) fn degenerate(what: impl Into<String>, location: impl std::fmt::Display) -> Self {
        Error::Degenerate {
            what: what.into(),
            location: location.to_string(),
        }
    }
}
