use thiserror::Error;

/// Failures surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("{0}")]
    Model(rmab_core::Error),

    #[error("refused: {0}")]
    Guard(rmab_core::Error),

    #[error("config {path}: {source}")]
    Schema {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 for a guard refusal.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Model(_) | CliError::Schema { .. } => 2,
            CliError::Guard(_) => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

impl From<rmab_core::Error> for CliError {
    fn from(e: rmab_core::Error) -> Self {
        match e {
            rmab_core::Error::GuardExceeded { .. } => CliError::Guard(e),
            other => CliError::Model(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
