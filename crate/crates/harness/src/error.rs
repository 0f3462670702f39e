use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("scenario line {line}: {message}")]
    Scenario { line: usize, message: String },
    #[error("scenario: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Core(#[from] pmod_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VIOLATED: u8 = 1;
    pub const INVALID: u8 = 2;
    pub const NO_CONVERGENCE: u8 = 3;
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    /// A failed precondition is an inequality that does not hold, so it
    /// shares the "violated" code.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Core(pmod_core::Error::Convergence { .. }) => exit::NO_CONVERGENCE,
            HarnessError::Precondition(_) => exit::VIOLATED,
            _ => exit::INVALID,
        }
    }
}
