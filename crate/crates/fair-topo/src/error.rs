//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid group assignment: {0}")]
    InvalidGroups(String),

    #[error("degenerate group {group} has {size} member(s); the groupwise gap divides by N_g^2 - N_g")]
    DegenerateGroup { group: usize, size: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("generator failed: {0}")]
    Generator(String),

    #[error("{path}: {detail}")]
    Format { path: String, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Exit status for the CLI: 2 for I/O and format problems, 1 for
    /// everything in the domain.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Format { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
