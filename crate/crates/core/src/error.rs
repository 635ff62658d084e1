use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical error at position {position}: all topics have zero probability")]
    ZeroProbability { position: usize },

    #[error("enumeration infeasible: {topics}^{length} assignments exceeds the limit of {limit}")]
    Infeasible { topics: usize, length: usize, limit: u64 },

    #[error("degenerate row {row}: all counts are zero and smoothing is zero")]
    DegenerateRow { row: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("singular Gram matrix: rows of the topic matrix are linearly dependent (use the ridge fallback)")]
    Singular,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short category name, used as the one-line diagnostic prefix by the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Data(_) => "data",
            Error::ZeroProbability { .. } | Error::Singular => "numerical",
            Error::Infeasible { .. } => "infeasible",
            Error::DegenerateRow { .. } => "degenerate",
            Error::Precondition(_) => "precondition",
            Error::Generation(_) => "generation",
            Error::Parse(_) => "parse",
            Error::Input(_) => "input",
            Error::Io(_) | Error::Csv(_) => "io",
        }
    }
}
