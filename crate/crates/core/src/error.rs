use std::path::PathBuf;

use crate::validate::ValidationReport;

pub type Result<T, E = HnoteError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum HnoteError {
    #[error("invalid token {lexeme:?} at line {line}, column {column}")]
    InvalidToken {
        line: usize,
        column: usize,
        lexeme: String,
    },

    #[error("score does not validate: {0}")]
    InvalidScore(Box<ValidationReport>),

    #[error("line {line} spans {units} units, not a positive multiple of 32")]
    DurationOverflow { line: usize, units: usize },

    #[error("invalid note: {0}")]
    InvalidNote(String),

    #[error("pitch code {0} is outside 0..=127")]
    PitchOutOfRange(u32),

    #[error("malformed YNote token {token:?} on line {line}: {reason}")]
    MalformedToken {
        line: usize,
        token: String,
        reason: &'static str,
    },

    #[error("unknown duration code {code:?} on line {line}")]
    UnknownDurationCode { line: usize, code: String },

    #[error("a note of {units} units cannot be decomposed into duration-table values")]
    UnrepresentableDuration { units: u32 },

    #[error("duration table: {0}")]
    DurationTable(String),

    #[error("metric input sequence is empty")]
    EmptySequence,

    #[error("reference has {len} tokens, fewer than n = {n}")]
    ReferenceTooShort { n: usize, len: usize },

    #[error("n-gram order must be in 1..=4, got {0}")]
    BadOrder(usize),

    #[error("training corpus is empty")]
    EmptyCorpus,

    #[error("bad configuration: {0}")]
    BadConfig(String),

    #[error("model file line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },

    #[error("prompt line {line}: {reason}")]
    PromptFormat { line: usize, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HnoteError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HnoteError::Io {
            path: path.into(),
            source,
        }
    }
}
