use std::io;

use thiserror::Error;

use crate::oracle::VerifyReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error(transparent)]
    Core(#[from] cellgraph::Error),

    #[error("verification failed: {} missing, {} extra", .0.missing.len(), .0.extra.len())]
    Mismatch(Box<VerifyReport>),
}

impl CliError {
    /// 1 for a verification mismatch, 2 for every usage, parse or input error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Mismatch(_) => 1,
            _ => 2,
        }
    }

    pub fn parse(source_name: &str, line: usize, msg: impl Into<String>) -> Self {
        CliError::Parse {
            source_name: source_name.to_string(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
