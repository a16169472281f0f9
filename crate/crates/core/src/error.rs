use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("decimal error: {0}")]
    Decimal(String),
    #[error("invalid date (expected YYYY-MM-DD): {0:?}")]
    Date(String),
    #[error("invalid value: {0}")]
    Value(String),
    #[error("invalid fact: {0}")]
    Fact(String),
    #[error("invalid database: {0}")]
    Database(String),
    #[error("invalid query: {0}")]
    Query(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error at line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}
