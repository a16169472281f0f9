//! Wire grammar for derivations.
//!
//! ```text
//! derivation := "NULL"
//!             | "BOOL" TAB ("TRUE" | "FALSE")
//!             | ("SET" | "COUNT") TAB span          ; span = raw non-empty text
//!             | extremal-op TAB "(" key "," SP value ")"
//! extremal-op := "MIN" | "MAX" | "ARGMIN" | "ARGMAX"
//! key   := non-empty text with "," "(" ")" "\" backslash-escaped
//! value := decimal number | ISO-8601 date
//! ```

use factdb_core::Value;
use thiserror::Error;

use crate::{Derivation, ExtremalOp, OperatorTag, SpanOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("derivation parse error at byte {position}: {reason}")]
pub struct ParseError {
    pub position: usize,
    pub reason: String,
}

fn err<T>(position: usize, reason: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { position, reason: reason.into() })
}

fn escape_key(key: &str) -> String {
    let mut out = String::with_capacity(key.len());
    for c in key.chars() {
        if matches!(c, '\\' | ',' | '(' | ')') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

pub fn serialize_derivation(d: &Derivation) -> String {
    match d {
        Derivation::Null => "NULL".to_string(),
        Derivation::Bool(b) => format!("BOOL\t{}", if *b { "TRUE" } else { "FALSE" }),
        Derivation::Span { op, text } => {
            let tag = match op {
                SpanOp::Set => "SET",
                SpanOp::Count => "COUNT",
            };
            format!("{tag}\t{text}")
        }
        Derivation::KeyValue { op, key, value } => {
            let tag = match op {
                ExtremalOp::Min => "MIN",
                ExtremalOp::Max => "MAX",
                ExtremalOp::ArgMin => "ARGMIN",
                ExtremalOp::ArgMax => "ARGMAX",
            };
            format!("{tag}\t({}, {})", escape_key(key), value.render())
        }
    }
}

/// Parse a key-value payload `(key, value)`; `start` is the byte offset of
/// the payload within the full derivation string (for error positions).
fn parse_key_value(payload: &str, start: usize, op: ExtremalOp) -> Result<Derivation, ParseError> {
    let bytes = payload.as_bytes();
    if bytes.first() != Some(&b'(') {
        return err(start, "expected '(' to open key-value payload");
    }
    if bytes.last() != Some(&b')') {
        return err(start + payload.len(), "unbalanced key-value payload: expected trailing ')'");
    }
    let inner = &payload[1..payload.len() - 1];

    // Walk to the first unescaped comma, unescaping the key as we go.
    let mut key = String::new();
    let mut chars = inner.char_indices().peekable();
    let mut sep = None;
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some((_, e)) if matches!(e, '\\' | ',' | '(' | ')') => key.push(e),
                Some((j, e)) => return err(start + 1 + j, format!("invalid escape '\\{e}'")),
                None => return err(start + 1 + i, "dangling backslash in key"),
            },
            ',' => {
                sep = Some(i);
                break;
            }
            '(' | ')' => {
                return err(start + 1 + i, format!("unescaped '{c}' in key"));
            }
            _ => key.push(c),
        }
    }
    let Some(sep) = sep else {
        return err(start + payload.len(), "missing ',' separator in key-value payload");
    };
    if key.is_empty() {
        return err(start + 1, "empty key in key-value payload");
    }
    let rest = &inner[sep + 1..];
    let Some(value_str) = rest.strip_prefix(' ') else {
        return err(start + 1 + sep + 1, "expected single space after ',' separator");
    };
    if value_str.is_empty() {
        return err(start + payload.len() - 1, "empty value in key-value payload");
    }
    let value = if let Ok(d) = value_str.parse::<factdb_core::Decimal>() {
        Value::Number(d)
    } else if let Ok(v) = Value::date(value_str) {
        v
    } else {
        return err(
            start + 1 + sep + 2,
            format!("key-value value must be a number or ISO date, got {value_str:?}"),
        );
    };
    Derivation::key_value(op, key, value)
        .map_err(|e| ParseError { position: start, reason: e.to_string() })
}

pub fn parse_derivation(s: &str) -> Result<Derivation, ParseError> {
    if s == "NULL" {
        return Ok(Derivation::Null);
    }
    let Some((tag_str, payload)) = s.split_once('\t') else {
        return err(
            0,
            if s.is_empty() { "empty derivation string" } else { "missing tab after operator tag" },
        );
    };
    let Some(tag) = OperatorTag::from_wire(tag_str) else {
        return err(0, format!("unknown operator tag {tag_str:?}"));
    };
    let payload_start = tag_str.len() + 1;
    match tag {
        OperatorTag::Bool => match payload {
            "TRUE" => Ok(Derivation::Bool(true)),
            "FALSE" => Ok(Derivation::Bool(false)),
            other => err(payload_start, format!("BOOL payload must be TRUE or FALSE, got {other:?}")),
        },
        OperatorTag::Set | OperatorTag::Count => {
            if payload.is_empty() {
                return err(payload_start, "empty span payload");
            }
            let op = if tag == OperatorTag::Set { SpanOp::Set } else { SpanOp::Count };
            Ok(Derivation::Span { op, text: payload.to_string() })
        }
        OperatorTag::Min | OperatorTag::Max | OperatorTag::ArgMin | OperatorTag::ArgMax => {
            let op = match tag {
                OperatorTag::Min => ExtremalOp::Min,
                OperatorTag::Max => ExtremalOp::Max,
                OperatorTag::ArgMin => ExtremalOp::ArgMin,
                _ => ExtremalOp::ArgMax,
            };
            parse_key_value(payload, payload_start, op)
        }
    }
}
