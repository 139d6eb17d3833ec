use std::process::ExitCode;

use nclass_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unparseable state specs or malformed input files.
    #[error("{0}")]
    Usage(String),

    /// Truncation or other numerical adequacy failures.
    #[error("{0}")]
    Adequacy(String),

    #[error("verification failed: {0}")]
    Verify(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => ExitCode::from(2),
            CliError::Adequacy(_) | CliError::Verify(_) => ExitCode::from(3),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::TruncationInadequate { dim, tail, suggested } => CliError::Adequacy(format!(
                "truncation at dim {dim} leaves tail mass {tail:.3e}; rerun with --dim {suggested} or larger"
            )),
            Error::EigenNoConvergence(_) | Error::NonPositiveQfi(_) | Error::NotPositive { .. } => {
                CliError::Adequacy(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
