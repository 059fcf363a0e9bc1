use std::fmt;

use thiserror::Error;

/// Which collection of a dataset a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    /// Target-distribution data.
    Q,
    /// Source data; the payload is the zero-based source number.
    P(usize),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Q => write!(f, "Q"),
            Origin::P(i) => write!(f, "P{}", i + 1),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch at {origin} sample {index}: expected {expected}, found {found}")]
    DimensionMismatch {
        origin: Origin,
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("query point has dimension {found}, index expects {expected}")]
    QueryDimension { expected: usize, found: usize },
    #[error("label {label} at {origin} sample {index} is not in {{0,1}}")]
    InvalidLabel {
        origin: Origin,
        index: usize,
        label: u8,
    },
    #[error("non-finite coordinate {coord} at {origin} sample {index}")]
    NonFiniteCoordinate {
        origin: Origin,
        index: usize,
        coord: usize,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("k = {k} out of range for a sample of size {n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("plan needs {needed} neighbors from {origin} but only {available} samples exist")]
    PlanExceedsSample {
        origin: Origin,
        needed: usize,
        available: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: unknown origin tag {tag:?}")]
    UnknownOrigin { line: u64, tag: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
