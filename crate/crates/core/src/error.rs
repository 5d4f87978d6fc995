use std::path::PathBuf;

use thiserror::Error;

/// Broad failure category, used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Io,
    Solver,
}

/// What went wrong on a specific line of a text matrix or vector file.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatIssue {
    #[error("malformed header {0:?}, expected `frames classes`")]
    MalformedHeader(String),
    #[error("expected {expected} values, found {found}")]
    RowLength { expected: usize, found: usize },
    #[error("row sums to {0}, expected 1")]
    RowSum(f64),
    #[error("non-numeric token {0:?}")]
    NonNumeric(String),
    #[error("probability {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("expected {expected} rows, found {found}")]
    MissingRows { expected: usize, found: usize },
    #[error("unexpected data after the last row")]
    TrailingData,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid loss order {order}: {reason}")]
    InvalidOrder { order: u32, reason: &'static str },

    #[error(
        "loss order {0} is odd: the roots of its gradient polynomial are complex numbers \
         and can't be used as a probability"
    )]
    OddOrder(u32),

    #[error("odd-order root analysis needs an odd order, got {0}")]
    EvenOrderForAnalysis(u32),

    #[error("{name} must lie in [0, 1], got {value}")]
    OutOfUnitInterval { name: &'static str, value: f64 },

    #[error("invalid solver config: {0}")]
    InvalidConfig(&'static str),

    #[error(
        "root solver did not converge after {iterations} iterations \
         (last iterate {last}, residual {residual:e})"
    )]
    NoConvergence {
        iterations: usize,
        last: f64,
        residual: f64,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("row {row} has no positive mass and cannot be normalized")]
    DegenerateRow { row: usize },

    #[error("entry ({row}, {col}) is negative or not finite: {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("class prior {index} must be positive and finite, got {value}")]
    InvalidPrior { index: usize, value: f64 },

    #[error("invalid HMM: {0}")]
    InvalidHmm(String),

    #[error("exhaustive decoding of {paths} paths exceeds the limit of {limit}")]
    TooLarge { paths: f64, limit: f64 },

    #[error("reference transcript is empty")]
    EmptyReference,

    #[error("corpus has no utterances")]
    EmptyCorpus,

    #[error("invalid noise settings: {0}")]
    InvalidNoise(&'static str),

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("{path}: line {line}: {issue}")]
    Format {
        path: PathBuf,
        line: usize,
        issue: FormatIssue,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NoConvergence { .. } => ErrorKind::Solver,
            Error::Io { .. } => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
