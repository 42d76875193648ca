use std::path::PathBuf;

use crdet::CrError;
use thiserror::Error;

/// Exit status for usage and configuration problems.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for numerical failures, including non-convergence.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {message}")]
    Config { path: PathBuf, line: usize, message: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] CrError),

    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Io { .. } => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Core(e) => match e {
                CrError::IllConditioned { .. } | CrError::Singular(_) | CrError::InsufficientOrder { .. } => {
                    EXIT_NUMERICAL
                }
                CrError::DegreeCap { .. }
                | CrError::NotReal { .. }
                | CrError::NotPluriharmonic(_)
                | CrError::Pole(_)
                | CrError::Hypothesis(_)
                | CrError::Dimension { .. }
                | CrError::InvalidModel(_)
                | CrError::Unsupported(_) => EXIT_USAGE,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(CrError::Pole(1.0)).exit_code(), 2);
        assert_eq!(CliError::Core(CrError::NotReal { residue: 1.0 }).exit_code(), 2);
        assert_eq!(CliError::Core(CrError::Singular("g".into())).exit_code(), 3);
        assert_eq!(CliError::Numerical("stalled".into()).exit_code(), 3);
    }
}
