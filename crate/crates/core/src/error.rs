use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("malformed transition: {0}")]
    MalformedTransition(String),

    #[error("transition on {k} nodes exceeds catalog limit of {n_max}")]
    TransitionTooLarge { k: usize, n_max: usize },

    #[error("subset is not contained in the padded egonet")]
    SubsetOutsidePair,

    #[error("temporal graph needs at least 2 snapshots, got {0}")]
    TooFewSnapshots(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("eigensolver did not converge (residual {residual:e})")]
    NotConverged { residual: f64 },

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable error class.
    pub fn class(&self) -> &'static str {
        match self {
            Error::UnknownNode(_) => "unknown-node",
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::MalformedTransition(_) => "malformed-transition",
            Error::TransitionTooLarge { .. } => "transition-too-large",
            Error::SubsetOutsidePair => "subset-outside-pair",
            Error::TooFewSnapshots(_) => "too-few-snapshots",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::Empty(_) => "empty-input",
            Error::Parse { .. } => "parse",
            Error::NotConverged { .. } => "not-converged",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
