use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] latsec_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for domain and input errors, 3 when a point budget is exceeded,
    /// 4 for malformed JSON, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use latsec_core::Error as E;
        match self {
            CliError::Core(E::BudgetExceeded { .. }) => 3,
            CliError::Core(E::Parse(_)) => 4,
            CliError::Core(E::Io(_)) | CliError::Io(_) => 1,
            CliError::Core(_) | CliError::Usage(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
