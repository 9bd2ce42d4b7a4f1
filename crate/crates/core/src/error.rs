//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("constraint {row} has no slack room (bound {bound})")]
    InfeasibleBound { row: usize, bound: f64 },

    #[error("dimension {0} has zero total weight")]
    DegenerateDimension(usize),

    #[error("reconstructed set is not independent: {0} and {1} are adjacent")]
    IndependenceViolation(usize, usize),

    #[error("{requested} qubits exceeds the simulator cap of {cap}")]
    QubitCapExceeded { requested: usize, cap: usize },

    #[error("expected {expected} parameters, got {got}")]
    ParamCountMismatch { expected: usize, got: usize },

    #[error("expectation value has imaginary residual {0:e}")]
    NonHermitianResidual(f64),

    #[error("{m} variables do not fit in {available} weight-2 correlators")]
    CapacityExceeded { m: usize, available: usize },

    #[error("problem of size {size} exceeds the exhaustive limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("search budget exceeded")]
    BudgetExceeded,

    #[error("baseline objective is zero")]
    ZeroBaseline,

    #[error("empty sample set")]
    EmptySample,

    #[error("empty input")]
    EmptyInput,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown problem family `{0}`")]
    UnknownFamily(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
