use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad category of a failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or configuration supplied by the caller.
    Usage,
    /// The input data is unreadable or violates a dataset invariant.
    Data,
    /// A numerical routine failed (e.g. eigensolver did not converge).
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed delimited input at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("line {line}, column {column}: cannot parse {value:?} as a finite number")]
    Parse {
        line: usize,
        column: usize,
        value: String,
    },

    #[error("line {line} has {found} fields, expected {expected}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("label column {0} not found")]
    LabelColumnNotFound(String),

    #[error("label column holds a single class ({0:?}); at least two are required")]
    SingleClass(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) => ErrorKind::Usage,
            Error::NotSymmetric { .. } | Error::NoConvergence { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }
}
