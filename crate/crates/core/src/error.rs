use thiserror::Error;

/// Errors raised by the lattice, series and bound computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid sublattice: {0}")]
    InvalidSublattice(String),

    #[error("operation requires a full-rank lattice (rank {rank}, ambient dimension {ambient})")]
    UnsupportedRank { rank: usize, ambient: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("point budget exceeded: estimated {estimated:.3e} points, cap {cap:.3e}")]
    BudgetExceeded { estimated: f64, cap: f64 },

    #[error("lattice is not of full diversity: point {point:?} has a zero component")]
    NotFullDiversity { point: Vec<i64> },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("field generation failed after {attempts} draws")]
    GenerationFailed { attempts: usize },

    #[error("unknown catalog lattice `{0}`")]
    UnknownLattice(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
