use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("column {0} has zero L1 norm")]
    ZeroColumn(usize),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("iteration limit of {0} reached")]
    IterLimit(usize),

    #[error("problem is infeasible")]
    Infeasible,

    #[error("problem is unbounded")]
    Unbounded,

    #[error("rank {rank} exceeds the number of distinct columns ({distinct})")]
    RankTooLarge { rank: usize, distinct: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no cluster scores above the threshold (selected {} of {} so far)", partial.len(), wanted)]
    NoQualifyingCluster { partial: Vec<usize>, wanted: usize },

    #[error("residual became numerically zero after {0} selections")]
    DegenerateResidual(usize),

    #[error("malformed input {path:?}: {msg}")]
    Malformed { path: PathBuf, msg: String },

    #[error("malformed csv: {0}")]
    MalformedCsv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
