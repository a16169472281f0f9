use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid template pack: {0}")]
    Pack(String),
    #[error("invalid generation config: {0}")]
    Config(String),
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("query has no candidates: {0}")]
    NoCandidates(String),
    #[error("malformed triple file at line {line}: {reason}")]
    TripleFile { line: usize, reason: String },
    #[error(transparent)]
    Core(#[from] factdb_core::CoreError),
    #[error(transparent)]
    Spj(#[from] factdb_spj::SpjError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
