use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("generator {index} is not unitary within tolerance")]
    NotUnitary { index: usize },

    #[error("group closure exceeded {limit} elements")]
    OrderLimit { limit: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("subgroup is not contained in the enclosing group")]
    NotSubgroup,

    #[error("vector does not have unit norm (norm = {0})")]
    NotUnit(f64),

    #[error("orbit of the initial vector is trivial")]
    TrivialOrbit,

    #[error("mismatched group parameters: {0}")]
    Mismatch(String),

    #[error("index {index} out of range for group of order {order}")]
    IndexOutOfRange { index: u128, order: u128 },

    #[error("group of order {order} is too large for enumeration (limit {limit})")]
    TooLarge { order: u128, limit: u128 },

    #[error("no termination within {steps} steps")]
    StepLimit { steps: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("json: {0}")]
    Json(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
