use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid mode {mode} for a tensor of order {order}")]
    InvalidMode { mode: usize, order: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("combinatorial budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("problem infeasible: distance from y to range(A) is {distance:.3e}, tolerance {epsilon:.3e}")]
    Infeasible { distance: f64, epsilon: f64 },

    #[error("solver failed in {stage}: {detail}")]
    SolverFailure { stage: String, detail: String },

    #[error("memory budget exceeded: {required} bytes required, budget {budget} bytes")]
    MemoryBudget { required: u64, budget: u64 },

    #[error("contract mismatch: {0}")]
    Contract(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
