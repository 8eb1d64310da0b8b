use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] stochnlw::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("acceptance check failed: {0}")]
    Acceptance(String),
}

impl CliError {
    /// 2 for invalid input, 3 when a computation ran but its acceptance
    /// property failed, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        use stochnlw::Error as E;
        match self {
            Self::Usage(_) => 2,
            Self::Core(
                E::BlowupGuard { .. }
                | E::NoContraction { .. }
                | E::DegenerateInterval { .. }
                | E::InsufficientTail { .. },
            ) => 3,
            Self::Core(_) => 2,
            Self::Io { .. } => 1,
            Self::Acceptance(_) => 3,
        }
    }
}
