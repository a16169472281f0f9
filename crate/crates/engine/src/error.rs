//! Engine-level errors, each mapped to a process exit code.

use thiserror::Error;

/// Errors surfaced by the pipeline and CLI. The variant decides the exit
/// code: usage problems exit 1, bad or missing data exits 2, remote
/// endpoint failures exit 3.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("remote: {0}")]
    Remote(String),
}

impl EngineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            EngineError::Usage(_) => 1,
            EngineError::Data(_) => 2,
            EngineError::Remote(_) => 3,
        }
    }
}

impl From<std::io::Error> for EngineError {
    fn from(e: std::io::Error) -> Self {
        EngineError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for EngineError {
    fn from(e: serde_json::Error) -> Self {
        EngineError::Data(e.to_string())
    }
}

impl From<factdb_core::CoreError> for EngineError {
    fn from(e: factdb_core::CoreError) -> Self {
        EngineError::Data(e.to_string())
    }
}

impl From<factdb_datagen::DatagenError> for EngineError {
    fn from(e: factdb_datagen::DatagenError) -> Self {
        EngineError::Data(e.to_string())
    }
}

impl From<factdb_eval::EvalError> for EngineError {
    fn from(e: factdb_eval::EvalError) -> Self {
        EngineError::Data(e.to_string())
    }
}

impl From<factdb_ssg::SsgError> for EngineError {
    fn from(e: factdb_ssg::SsgError) -> Self {
        // The only embedding failures the engine can produce come from the
        // remote encoder; everything else is a data problem.
        match e {
            factdb_ssg::SsgError::Embedding(msg) => EngineError::Remote(msg),
            other => EngineError::Data(other.to_string()),
        }
    }
}

impl From<rayon::ThreadPoolBuildError> for EngineError {
    fn from(e: rayon::ThreadPoolBuildError) -> Self {
        EngineError::Data(e.to_string())
    }
}
