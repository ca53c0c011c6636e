use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid value for `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Core(#[from] spikecov_core::error::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("summary metric `{0}` is not finite")]
    NonFinite(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl HarnessError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(self, HarnessError::Config { .. })
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
