use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Pipeline stage that failed; doubles as the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Usage = 2,
    Input = 3,
    Config = 4,
    Validation = 5,
    Solve = 6,
    Analysis = 7,
    Compare = 8,
    Sweep = 9,
    Output = 10,
    Schema = 11,
}

impl Stage {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("malformed config {}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("profile {} does not match the expected schema: {message}", path.display())]
    Schema { path: PathBuf, message: String },
    #[error("parameter validation failed: {0}")]
    Validation(qball_core::Error),
    #[error("solve failed: {0}")]
    Solve(qball_core::Error),
    #[error("{message}")]
    Check { stage: Stage, message: String },
    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    pub fn stage(&self) -> Stage {
        match self {
            CliError::Read { .. } => Stage::Input,
            CliError::Write { .. } => Stage::Output,
            CliError::Config { .. } => Stage::Config,
            CliError::Schema { .. } => Stage::Schema,
            CliError::Validation(_) => Stage::Validation,
            CliError::Solve(_) => Stage::Solve,
            CliError::Check { stage, .. } => *stage,
            CliError::Usage(_) => Stage::Usage,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.stage().code()
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
