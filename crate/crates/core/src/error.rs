use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfUnitInterval { name: &'static str, value: f64 },

    /// A closed form whose series diverges at this density.
    #[error("{quantity} is undefined at p = {p}: the series converges only for {window}")]
    Domain {
        quantity: &'static str,
        p: f64,
        window: &'static str,
    },

    #[error("{what} supports {limit_name} <= {limit}, got {got}")]
    Size {
        what: &'static str,
        limit_name: &'static str,
        limit: u64,
        got: u64,
    },

    /// Entropy or length requested for a configuration with no leaves.
    #[error("{0} is undefined for a configuration with no leaves (normalization is 0)")]
    Undefined(&'static str),

    #[error("symbol index {index} is out of range for a codebook of {len} entries")]
    Index { index: usize, len: usize },

    #[error(transparent)]
    Decode(#[from] DecodeError),

    #[error("duplicate codeword {0:?}")]
    DuplicateCodeword(String),

    #[error("invalid bit string {0:?}: only '0' and '1' are allowed")]
    InvalidBits(String),

    #[error("invalid cluster: {0}")]
    InvalidCluster(String),

    #[error("invalid tally: {0}")]
    InvalidTally(String),

    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("codebook is not prefix-free")]
    NotPrefixFree,
    #[error("codebook is empty")]
    EmptyBook,
    #[error("codebook contains the empty codeword, which cannot delimit a non-empty input")]
    EmptyCodeword,
    #[error("no codeword matches the input starting at bit {start} (failed at bit {position})")]
    NoMatch { start: usize, position: usize },
    #[error("input ends inside a codeword that started at bit {start}")]
    Truncated { start: usize },
}
