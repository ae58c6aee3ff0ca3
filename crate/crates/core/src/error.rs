use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the expansion engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("duplicate vocabulary surface {surface:?} at line {line}")]
    DuplicateSurface { line: usize, surface: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncated cache file at byte offset {offset}")]
    TruncatedCache { offset: u64 },

    #[error("malformed cache: {0}")]
    MalformedCache(String),

    #[error("vocabulary hash mismatch: cache has {cache}, vocabulary has {vocab}")]
    VocabularyMismatch { cache: String, vocab: String },

    #[error("probe query must contain exactly one [MASK], found {found} in {text:?}")]
    MaskCount { text: String, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fixture has no {kind} response for {query:?}")]
    FixtureMiss { kind: &'static str, query: String },

    #[error("language model request to {endpoint} failed: {message}")]
    LmTransport {
        endpoint: String,
        message: String,
        retryable: bool,
    },

    #[error("language model failed on sentence {sentence_id}: {source}")]
    LmAtSentence {
        sentence_id: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("entity {0} has no embeddings in the store")]
    EntityAbsent(u32),

    #[error("unknown entity {0:?}")]
    UnknownEntity(String),

    #[error("candidate class name pool is empty")]
    EmptyPool,

    #[error("ranked lists do not cover the same items")]
    PoolMismatch,

    #[error("entity {0} is missing from a candidate ranking")]
    MissingFromRanking(u32),

    #[error("ground truth is empty after removing seeds")]
    EmptyGroundTruth,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure came from infrastructure (LM service, I/O)
    /// rather than from user input.
    pub fn is_infrastructure(&self) -> bool {
        match self {
            Error::Io { .. } | Error::LmTransport { .. } => true,
            Error::LmAtSentence { source, .. } => source.is_infrastructure(),
            _ => false,
        }
    }

    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            Error::LmTransport {
                retryable: true,
                ..
            }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
