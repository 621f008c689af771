use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("classical bit {0} read before being written by a measurement")]
    UnwrittenClassicalBit(usize),

    #[error("infeasible: requires {required} bytes > guard {budget} bytes")]
    Infeasible { required: u128, budget: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
