use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed file at byte {offset}: {reason}")]
    Format {
        path: PathBuf,
        offset: u64,
        reason: String,
    },
    #[error("{path}: requested {requested} images but the file holds {available}")]
    Range {
        path: PathBuf,
        requested: usize,
        available: usize,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Core(#[from] trp_core::Error),
}

impl CliError {
    /// Process exit code: 1 for configuration problems, 2 for I/O and
    /// file-format problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Core(_) => 1,
            Self::Io { .. } | Self::Format { .. } | Self::Range { .. } | Self::Csv(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
