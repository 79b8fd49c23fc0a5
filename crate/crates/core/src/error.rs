use thiserror::Error;

use crate::model::ValidationReport;
use crate::scalar::ScalarParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance:\n{0}")]
    InvalidInstance(ValidationReport),
    #[error("invalid share vector: {0}")]
    InvalidShares(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{count} fractional coordinates exceed the enumeration limit of {limit}")]
    TooManyFractional { count: usize, limit: usize },
    #[error("cluster {cluster} is allocated {quota} winners but has only {size} members")]
    ClusterOverflow {
        cluster: usize,
        quota: usize,
        size: usize,
    },
    #[error("reviewer {reviewer} scored agent {reviewee}, which it was not assigned")]
    UnassignedReview { reviewer: usize, reviewee: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Scalar(#[from] ScalarParseError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by malformed input text rather than by
    /// semantically invalid values.
    pub fn is_parse_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Scalar(_) | Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
