use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown plan `{0}`")]
    UnknownPlan(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration budget exceeded: {count} combinations, budget is {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("qubit {qubit} is outside the {rows}x{cols} grid")]
    QubitOutOfRange { qubit: u32, rows: usize, cols: usize },

    #[error("embedding does not fit (cluster {cluster}): {reason}")]
    DoesNotFit { cluster: usize, reason: String },

    #[error("embedding verification failed: {0}")]
    InvalidEmbedding(String),

    #[error("i/o error")]
    Io(#[from] std::io::Error),

    #[error("json error")]
    Json(#[from] serde_json::Error),

    #[error("csv error")]
    Csv(#[from] csv::Error),
}
