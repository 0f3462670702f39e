use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    #[error("point outside domain: {0}")]
    Domain(String),

    #[error("singular point: {0}")]
    Singularity(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
