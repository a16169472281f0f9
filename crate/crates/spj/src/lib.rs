//! Select-Project-Join operator.
//!
//! Maps (query, one support set) to a machine-readable [`Derivation`].
//! Ships the wire grammar (serialize/parse), an oracle implementation that
//! reads fact grounding, a remote-model HTTP client, and a deterministic
//! parallel map over support sets.

mod grammar;
mod map;
mod oracle;
mod remote;

pub use grammar::{parse_derivation, serialize_derivation, ParseError};
pub use map::{spj_map, SpjMapOutput};
pub use oracle::{oracle_spj, OracleSpj};
pub use remote::{RemoteSpj, RemoteSpjConfig};

use factdb_core::{Database, Query, SupportSet, Value};
use thiserror::Error;

/// Operator token carried by a derivation (absent on Null).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OperatorTag {
    Set,
    Bool,
    Count,
    Min,
    Max,
    ArgMin,
    ArgMax,
}

impl OperatorTag {
    pub fn wire(&self) -> &'static str {
        match self {
            OperatorTag::Set => "SET",
            OperatorTag::Bool => "BOOL",
            OperatorTag::Count => "COUNT",
            OperatorTag::Min => "MIN",
            OperatorTag::Max => "MAX",
            OperatorTag::ArgMin => "ARGMIN",
            OperatorTag::ArgMax => "ARGMAX",
        }
    }

    pub fn from_wire(s: &str) -> Option<OperatorTag> {
        Some(match s {
            "SET" => OperatorTag::Set,
            "BOOL" => OperatorTag::Bool,
            "COUNT" => OperatorTag::Count,
            "MIN" => OperatorTag::Min,
            "MAX" => OperatorTag::Max,
            "ARGMIN" => OperatorTag::ArgMin,
            "ARGMAX" => OperatorTag::ArgMax,
            _ => return None,
        })
    }
}

impl std::fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.wire())
    }
}

/// Span-producing operators (payload is a raw text span).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpanOp {
    Set,
    Count,
}

/// Extremal operators (payload is a key-value pair). MIN/MAX aggregate to
/// the value, ARGMIN/ARGMAX to the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtremalOp {
    Min,
    Max,
    ArgMin,
    ArgMax,
}

/// One SPJ output. The operator/payload coupling (BOOL ↔ boolean,
/// SET/COUNT ↔ span, MIN/MAX/ARG* ↔ key-value) is enforced by the shape of
/// the type; Null carries no operator token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Derivation {
    Null,
    Bool(bool),
    Span { op: SpanOp, text: String },
    KeyValue { op: ExtremalOp, key: String, value: Value },
}

impl Derivation {
    pub fn span(op: SpanOp, text: impl Into<String>) -> Result<Derivation, SpjError> {
        let text = text.into();
        if text.is_empty() {
            return Err(SpjError::InvalidDerivation("empty span".into()));
        }
        Ok(Derivation::Span { op, text })
    }

    pub fn key_value(
        op: ExtremalOp,
        key: impl Into<String>,
        value: Value,
    ) -> Result<Derivation, SpjError> {
        let key = key.into();
        if key.is_empty() {
            return Err(SpjError::InvalidDerivation("empty key".into()));
        }
        if !matches!(value, Value::Number(_) | Value::Date(_)) {
            return Err(SpjError::InvalidDerivation(format!(
                "key-value payload must be Number or Date, got {}",
                value.otype()
            )));
        }
        Ok(Derivation::KeyValue { op, key, value })
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Derivation::Null)
    }

    /// Operator token, absent on Null.
    pub fn tag(&self) -> Option<OperatorTag> {
        Some(match self {
            Derivation::Null => return None,
            Derivation::Bool(_) => OperatorTag::Bool,
            Derivation::Span { op: SpanOp::Set, .. } => OperatorTag::Set,
            Derivation::Span { op: SpanOp::Count, .. } => OperatorTag::Count,
            Derivation::KeyValue { op: ExtremalOp::Min, .. } => OperatorTag::Min,
            Derivation::KeyValue { op: ExtremalOp::Max, .. } => OperatorTag::Max,
            Derivation::KeyValue { op: ExtremalOp::ArgMin, .. } => OperatorTag::ArgMin,
            Derivation::KeyValue { op: ExtremalOp::ArgMax, .. } => OperatorTag::ArgMax,
        })
    }
}

#[derive(Debug, Error)]
pub enum SpjError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid derivation: {0}")]
    InvalidDerivation(String),
    #[error("query {0} carries no machine-readable semantics")]
    MissingSemantics(String),
    #[error("query {query} semantics do not fit qtype {qtype}")]
    SemanticsMismatch { query: String, qtype: String },
    #[error("support set references unknown fact {0}")]
    UnknownFact(factdb_core::FactId),
    #[error("transport error: {0}")]
    Transport(String),
}

/// An SPJ implementation: pure with respect to its inputs, shareable across
/// worker threads.
pub trait SpjOperator: Send + Sync {
    fn derive(
        &self,
        query: &Query,
        support: &SupportSet,
        db: &Database,
    ) -> Result<Derivation, SpjError>;

    /// Parse failures observed so far (remote implementations only).
    fn parse_failures(&self) -> u64 {
        0
    }
}
