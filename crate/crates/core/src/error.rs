use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: malformed record: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("line {line}: record {id}: {reason}")]
    InvalidRecord { line: usize, id: String, reason: String },

    #[error("tree parse error at offset {offset}: {reason}")]
    TreeParse { offset: usize, reason: String },

    #[error("alignment format error at pair {position}: {reason}")]
    AlignmentFormat { position: usize, reason: String },

    #[error("alignment link {link} at pair {position} is out of range for lengths ({src_len}, {tgt_len})")]
    AlignmentRange {
        position: usize,
        link: String,
        src_len: usize,
        tgt_len: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty corpus: no usable sentence pairs")]
    EmptyCorpus,

    #[error("training data contains a single class ({0}); at least two are required")]
    SingleClass(String),

    #[error("non-finite loss at epoch {epoch} (last finite loss {last_loss}, weight norm {weight_norm})")]
    NonFinite {
        epoch: usize,
        last_loss: f64,
        weight_norm: f64,
    },

    #[error("unknown label {label:?}; expected one of {expected:?}")]
    UnknownLabel { label: String, expected: Vec<String> },

    #[error("unknown sentence id {0:?}")]
    UnknownSentence(String),

    #[error(
        "instance ids differ: missing from first input {missing_first:?}, missing from second input {missing_second:?}"
    )]
    IdMismatch {
        missing_first: Vec<String>,
        missing_second: Vec<String>,
    },

    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },

    #[error("label sequences differ in length ({golds} gold vs {preds} predicted)")]
    LengthMismatch { golds: usize, preds: usize },

    #[error("session {0:?} not found")]
    SessionNotFound(String),

    #[error("annotator {annotator:?} is not registered to session {session:?}")]
    Unauthorized { session: String, annotator: String },

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("validation error: {0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
