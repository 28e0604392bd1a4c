use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{context}: {source}")]
    Cell { context: String, source: Box<HarnessError> },
}

impl HarnessError {
    /// 2 usage, 3 validation (including unwritable output), 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            HarnessError::Validation(_) | HarnessError::Io { .. } => 3,
            HarnessError::Numerical(_) => 4,
            HarnessError::Cell { source, .. } => source.exit_code(),
        }
    }

    pub fn in_cell(self, context: impl Into<String>) -> Self {
        HarnessError::Cell {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

impl From<deeponet_core::error::Error> for HarnessError {
    fn from(e: deeponet_core::error::Error) -> Self {
        if e.is_validation() {
            HarnessError::Validation(e.to_string())
        } else {
            HarnessError::Numerical(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Validation(msg.into())
}
