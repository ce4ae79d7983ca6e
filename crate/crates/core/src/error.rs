use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("row {0} is zero; Kaczmarz methods need nonzero rows")]
    ZeroRow(usize),

    #[error("jacobi SVD did not converge within {sweeps} sweeps")]
    SvdNotConverged { sweeps: usize },

    #[error("matrix is rank deficient (column {column}) below tolerance")]
    RankDeficient { column: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("block size {s} out of range 1..={max}")]
    BlockSizeOutOfRange { s: usize, max: usize },

    #[error("enumeration of C({m}, {s}) = {count} subsets exceeds the budget of {budget}")]
    EnumerationBudget {
        m: usize,
        s: usize,
        count: u128,
        budget: u128,
    },

    #[error("every {s}-subset has zero volume; rank tolerance is inconsistent with s")]
    DegenerateVolume { s: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index order violated: need 1 <= i < j <= m, got ({i}, {j}) with m = {m}")]
    IndexOrder { i: usize, j: usize, m: usize },

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// An `InvalidParameter` error with the given message.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
