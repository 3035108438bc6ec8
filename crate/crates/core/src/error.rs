//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Config(String),
    #[error("precision exhausted in {stage}")]
    Precision { stage: String },
    #[error("budget exceeded in {stage}: {detail}")]
    Budget { stage: String, detail: String },
    #[error("degree bound violated: {0}")]
    Degree(String),
    #[error("not admissible: {0}")]
    Inadmissible(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsolvable step at index {0}")]
    Unsolvable(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn precision(stage: &str) -> Self {
        Error::Precision { stage: stage.to_string() }
    }

    pub fn budget(stage: &str, detail: impl Into<String>) -> Self {
        Error::Budget { stage: stage.to_string(), detail: detail.into() }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precision { .. } | Error::Budget { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
