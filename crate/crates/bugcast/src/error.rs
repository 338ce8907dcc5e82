use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit codes used by the CLI, loosely after sysexits.h.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const VALIDATION: i32 = 65;
    pub const INPUT_NOT_FOUND: i32 = 66;
    pub const EXTRACTION: i32 = 70;
    pub const NUMERIC: i32 = 71;
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("input not found: {0}")]
    InputNotFound(PathBuf),

    #[error("validation failed: {0}")]
    Validation(String),

    /// Export file could not be parsed at all (as opposed to individual bad records,
    /// which only produce warnings).
    #[error("unreadable {format} export near byte {offset}: {reason}")]
    ExportUnreadable {
        format: &'static str,
        offset: usize,
        reason: String,
    },

    #[error("git {action} failed in {repo}: {detail}")]
    Git {
        action: String,
        repo: PathBuf,
        detail: String,
    },

    #[error("metric extraction failed: {0}")]
    Extraction(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("metric '{0}' missing from input vector")]
    MissingMetric(String),

    #[error("tracker endpoint error: {0}")]
    Http(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Validation(format!("csv: {other:?}")),
        }
    }
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => exit::USAGE,
            Error::InputNotFound(_) => exit::INPUT_NOT_FOUND,
            Error::Validation(_) | Error::ExportUnreadable { .. } => exit::VALIDATION,
            Error::Git { .. } | Error::Extraction(_) | Error::Io(_) | Error::Http(_) => {
                exit::EXTRACTION
            }
            Error::Numeric(_) | Error::MissingMetric(_) => exit::NUMERIC,
        }
    }
}
