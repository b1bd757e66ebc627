use dirac_semiclassical::Error as CoreError;
use thiserror::Error;

/// Failure classes with their process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Exit 1.
    #[error("validation failed: {0}")]
    Validation(String),
    /// Exit 2.
    #[error("{0}")]
    Config(String),
    /// Exit 3.
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_) | CoreError::Domain(_) | CoreError::Unsupported(_) => {
                CliError::Config(e.to_string())
            }
            CoreError::Integration { .. }
            | CoreError::Shooting(_)
            | CoreError::NearConjugate { .. }
            | CoreError::IllConditioned { .. }
            | CoreError::DegenerateProjection(_) => CliError::Numerical(e.to_string()),
        }
    }
}
