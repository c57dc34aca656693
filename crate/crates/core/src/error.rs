use std::fmt;

use thiserror::Error;

/// Location-tagged error produced while reading a circuit program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index out of range: {0}")]
    Range(String),

    #[error("resource limit exceeded: {what} is {actual}, limit {limit}")]
    ResourceLimit {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("outcome {outcome} on site {site} has zero probability")]
    ImpossibleOutcome { site: usize, outcome: u8 },

    #[error("stabilizer projection annihilated the seed state")]
    DegenerateSeed,

    #[error("incomplete pattern: {0}")]
    IncompletePattern(String),

    #[error("parse error at {0}")]
    Parse(ParseError),

    #[error("semantic error at {0}")]
    Semantic(ParseError),

    #[error("patch too small: {0}")]
    Capacity(String),

    #[error("decoding inconsistency on wire {wire}: upper reads {upper}, lower reads {lower}")]
    DecodeInconsistency { wire: usize, upper: u8, lower: u8 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
