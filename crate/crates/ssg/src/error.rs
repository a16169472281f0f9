use factdb_core::{CoreError, FactId};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SsgError {
    #[error("empty database cannot be indexed")]
    EmptyDatabase,
    #[error("dimension mismatch: index dim {expected}, state dim {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding invariant violated: {0}")]
    Embedding(String),
    #[error("invalid ssg config: {0}")]
    Config(String),
    #[error("query {0} carries no gold support sets")]
    MissingGold(String),
    #[error("scorer proposed unknown fact {0}")]
    UnknownFact(FactId),
    #[error("index file invalid: {0}")]
    BadIndex(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
