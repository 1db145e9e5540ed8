//! Command-line front end, file formats and the simulation harness.

pub mod cli;
pub mod experiment;
pub mod io;
pub mod reference;

use crate::error::Error;

/// Failure classes surfaced by the binary, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numerical: {0}")]
    Numerical(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Data(_) => 3,
            AppError::Numerical(_) => 4,
        }
    }

    /// Maps a library error, prefixing the message with `module`.
    pub fn context(module: &'static str) -> impl Fn(Error) -> AppError {
        move |e| {
            let msg = format!("{module}: {e}");
            if e.is_numerical() {
                AppError::Numerical(msg)
            } else {
                AppError::Data(msg)
            }
        }
    }
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            AppError::Numerical(e.to_string())
        } else {
            AppError::Data(e.to_string())
        }
    }
}
