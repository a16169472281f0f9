//! Exact aggregation over SPJ derivations: operator selection by majority
//! vote, then union/count/min/max/argmin/argmax/boolean reduction.
//!
//! All functions are pure and permutation-invariant in their derivation
//! lists.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use factdb_core::{collapse_whitespace, Answer, Decimal, Value};
use factdb_spj::{Derivation, OperatorTag};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AggregateError {
    #[error("no operands for {0}: zero key-value payloads")]
    NoOperands(OperatorTag),
    #[error("cannot compare {a} with {b}")]
    TypeMismatch { a: &'static str, b: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationResult {
    pub answer: Answer,
    pub chosen_op: OperatorTag,
    pub n_derivations: usize,
    pub n_null: usize,
    pub n_parse_failures: usize,
    /// Derivations whose payload type did not fit the chosen operator.
    pub n_skipped: usize,
}

/// Fixed tie-breaking precedence (earlier wins).
const PRECEDENCE: [OperatorTag; 7] = [
    OperatorTag::Set,
    OperatorTag::Bool,
    OperatorTag::Count,
    OperatorTag::Max,
    OperatorTag::Min,
    OperatorTag::ArgMax,
    OperatorTag::ArgMin,
];

/// Majority operator tag among non-Null derivations; ties broken by the
/// fixed precedence; all-Null or empty input defaults to SET.
pub fn vote_operator(ds: &[Derivation]) -> OperatorTag {
    let mut counts = std::collections::BTreeMap::new();
    for d in ds {
        if let Some(tag) = d.tag() {
            *counts.entry(tag).or_insert(0usize) += 1;
        }
    }
    let best = counts.values().copied().max().unwrap_or(0);
    if best == 0 {
        return OperatorTag::Set;
    }
    PRECEDENCE
        .into_iter()
        .find(|tag| counts.get(tag) == Some(&best))
        .expect("nonzero majority always matches a precedence entry")
}

/// Total order for extremal aggregation: numeric for Numbers,
/// chronological for Dates (lexicographic on ISO form), mixed types are
/// incomparable.
pub fn compare_values(a: &Value, b: &Value) -> Result<Ordering, AggregateError> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => Ok(x.cmp(y)),
        (Value::Date(x), Value::Date(y)) => Ok(x.cmp(y)),
        _ => Err(AggregateError::TypeMismatch { a: a.otype(), b: b.otype() }),
    }
}

fn distinct_spans(ds: &[Derivation]) -> (BTreeSet<String>, usize) {
    let mut spans = BTreeSet::new();
    let mut skipped = 0;
    for d in ds {
        match d {
            Derivation::Span { text, .. } => {
                let canon = collapse_whitespace(text);
                if !canon.is_empty() {
                    spans.insert(canon);
                }
            }
            Derivation::Null => {}
            _ => skipped += 1,
        }
    }
    (spans, skipped)
}

/// Extremal fold over key-value payloads. `want_max` selects the
/// direction; ties by lexicographically smallest key. Returns
/// (key, value, skipped).
fn extremal(
    op: OperatorTag,
    ds: &[Derivation],
    want_max: bool,
) -> Result<(String, Value, usize), AggregateError> {
    let mut skipped = 0;
    let mut best: Option<(String, Value)> = None;
    for d in ds {
        let (key, value) = match d {
            Derivation::KeyValue { key, value, .. } => (key, value),
            Derivation::Null => continue,
            _ => {
                skipped += 1;
                continue;
            }
        };
        match &best {
            None => best = Some((key.clone(), value.clone())),
            Some((bkey, bvalue)) => match compare_values(value, bvalue) {
                Ok(ord) => {
                    let better = if want_max {
                        ord == Ordering::Greater
                    } else {
                        ord == Ordering::Less
                    };
                    if better || (ord == Ordering::Equal && key < bkey) {
                        best = Some((key.clone(), value.clone()));
                    }
                }
                // First-seen value type wins; incomparable payloads are
                // skipped and counted, keeping the fold deterministic.
                Err(_) => skipped += 1,
            },
        }
    }
    match best {
        Some((key, value)) => Ok((key, value, skipped)),
        None => Err(AggregateError::NoOperands(op)),
    }
}

fn value_to_answer(v: Value) -> Answer {
    match v {
        Value::Number(d) => Answer::Num(d),
        other => Answer::Str(other.render()),
    }
}

/// Reduce derivations under the given operator. See `aggregate` for the
/// plain-answer variant; this one also reports how many derivations were
/// skipped for payload-type mismatch.
pub fn aggregate_detailed(
    op: OperatorTag,
    ds: &[Derivation],
) -> Result<(Answer, usize), AggregateError> {
    match op {
        OperatorTag::Set => {
            let (spans, skipped) = distinct_spans(ds);
            Ok((Answer::StrSet(spans), skipped))
        }
        OperatorTag::Count => {
            let (spans, skipped) = distinct_spans(ds);
            Ok((Answer::Num(Decimal::from(spans.len())), skipped))
        }
        OperatorTag::Bool => {
            let mut skipped = 0;
            let mut any_true = false;
            for d in ds {
                match d {
                    Derivation::Bool(b) => any_true |= *b,
                    Derivation::Null => {}
                    _ => skipped += 1,
                }
            }
            // Closed world: no evidence means FALSE, never an error.
            Ok((Answer::Bool(any_true), skipped))
        }
        OperatorTag::Max | OperatorTag::ArgMax => {
            let (key, value, skipped) = extremal(op, ds, true)?;
            let answer = if op == OperatorTag::Max { value_to_answer(value) } else { Answer::Str(key) };
            Ok((answer, skipped))
        }
        OperatorTag::Min | OperatorTag::ArgMin => {
            let (key, value, skipped) = extremal(op, ds, false)?;
            let answer = if op == OperatorTag::Min { value_to_answer(value) } else { Answer::Str(key) };
            Ok((answer, skipped))
        }
    }
}

/// Reduce derivations under the given operator.
pub fn aggregate(op: OperatorTag, ds: &[Derivation]) -> Result<Answer, AggregateError> {
    aggregate_detailed(op, ds).map(|(a, _)| a)
}

/// Vote, aggregate, and collect bookkeeping counts in one step.
pub fn aggregate_all(
    ds: &[Derivation],
    n_parse_failures: usize,
) -> Result<AggregationResult, AggregateError> {
    let chosen_op = vote_operator(ds);
    let (answer, n_skipped) = aggregate_detailed(chosen_op, ds)?;
    Ok(AggregationResult {
        answer,
        chosen_op,
        n_derivations: ds.len(),
        n_null: ds.iter().filter(|d| d.is_null()).count(),
        n_parse_failures,
        n_skipped,
    })
}
