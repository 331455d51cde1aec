//! Library surface of the `growgraph` command-line harness: configuration,
//! ensemble execution, persistence, and the verification suite.

pub mod config;
pub mod ensemble;
pub mod report;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("{0}")]
    Invalid(String),

    #[error("replica {replica} (seed {seed}) failed: {message}")]
    Replica {
        replica: u64,
        seed: u64,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] growgraph::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
