use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("no parseable {language} source files under {root}")]
    EmptyCodebase { root: String, language: String },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("conflicting registrations for tool '{tool}': {details}")]
    Conflict { tool: String, details: String },

    #[error("register call for '{tool}' has no argument resolving to a known function")]
    UnresolvedHandler { tool: String },

    #[error("entry resolution failed for tool '{tool}': {reason}")]
    ResolutionFailed { tool: String, reason: String },

    #[error("invalid operation: {0}")]
    InvalidOperation(String),

    #[error("description generation failed: {0}")]
    GenerationFailed(String),

    #[error("cassette miss for purpose {purpose} (key {key})")]
    CassetteMiss { purpose: String, key: String },

    #[error("llm backend error: {0}")]
    Backend(String),

    #[error("failed to spawn server process: {0}")]
    Spawn(String),

    #[error("protocol error {code}: {message}")]
    Protocol { code: i64, message: String },

    #[error("malformed server response: {detail}; raw bytes: {raw:?}")]
    MalformedResponse { detail: String, raw: String },

    #[error("timed out after {0} ms")]
    Timeout(u64),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
