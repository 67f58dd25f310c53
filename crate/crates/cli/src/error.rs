use thiserror::Error;

/// Exit-code contract: 0 success (including a suspected blow-up, which is
/// a finding, not an error), 1 informative negative (certificate does not
/// hold / a residual exceeded tolerance), 2 configuration or parse error,
/// 3 numerical failure, 4 insufficient snapshots for a ladder window.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("insufficient snapshots: {0}")]
    Resolution(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(asq_core::CoreError),
}

impl From<asq_core::CoreError> for CliError {
    fn from(e: asq_core::CoreError) -> Self {
        use asq_core::CoreError as CE;
        match e {
            CE::Config(msg) | CE::InvalidManifold(msg) => CliError::Config(msg),
            CE::NonFinite { t } => CliError::Numerical(format!("non-finite values at t = {t}")),
            CE::EmptyWindow { .. } => CliError::Resolution(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Resolution(_) => 4,
            CliError::Io(_) => 2,
            CliError::Core(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
