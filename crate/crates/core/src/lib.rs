//! Core domain types for the factdb engine: values, facts, databases,
//! queries, support sets, answers, and answer canonicalization/equality.
//!
//! Everything in this crate is an immutable value type and safe to share
//! across worker threads.

mod answer;
mod decimal;
mod error;
mod fact;
mod query;
mod value;

pub use answer::{answer_equal, canonicalize_answer, collapse_whitespace, render_answer, Answer};
pub use decimal::Decimal;
pub use error::CoreError;
pub use fact::{Database, Fact, FactId, Triple};
pub use query::{ExtremalKind, Query, QuerySemantics, QueryType, Slot, SupportSet};
pub use value::Value;

pub type Result<T> = std::result::Result<T, CoreError>;
