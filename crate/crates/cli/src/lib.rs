//! Front end for the surface, solver and limit-set toolkit.

pub mod checks;
pub mod config;
pub mod run;
pub mod svg;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] affine_limit::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 3,
        }
    }
}
