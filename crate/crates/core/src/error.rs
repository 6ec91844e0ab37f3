use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vocabulary: {0}")]
    Vocab(String),

    #[error("unknown token {0:?}")]
    UnknownSymbol(String),

    #[error("token id {id} out of range for vocabulary of size {size}")]
    UnknownToken { id: u32, size: usize },

    #[error("prefix contains the end-of-sequence token")]
    EosInPrefix,

    #[error("invalid model: {0}")]
    Validation(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid search config: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),
}
