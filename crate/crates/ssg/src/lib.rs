//! Support Set Generation (SSG).
//!
//! A support set is the minimal subset of facts needed to produce one
//! operand for aggregation. This crate builds the sets iteratively: starting
//! from the empty set, a scorer ranks "add this fact" and STOP actions by
//! inner product between a state encoding (query + partial set) and
//! precomputed fact encodings; STOP closes a set, additions grow the open
//! frontier, and bounded beam-style caps keep the search deterministic and
//! cheap.
//!
//! Pieces:
//! - [`EmbeddingVector`], [`BiEncoder`]: unit-norm vectors and the
//!   fact/state encoder pair sharing one space (plus a STOP row).
//! - [`build_index`], [`mips`], [`IndexedDatabase`]: the precomputed fact
//!   matrix and exhaustive exact inner-product search with τ/k_max
//!   selection; binary persistence keyed on a database digest.
//! - [`run_ssg`] / [`generate_support_sets`]: the expansion loop with
//!   duplicate merging, m_max/b_max caps and instrumentation.
//! - [`LexicalEncoder`]: hashed TF·IDF realization of the bi-encoder whose
//!   STOP score grows as the partial set covers the query.
//! - [`OracleScorer`]: perfect 0/1 scorer built from gold support sets.
//! - [`tfidf_topk`]: the primitive single-fact retrieval baseline.

mod action;
mod algo;
mod embed;
mod encoder;
mod error;
mod index;
mod oracle;
mod tfidf;

pub use action::{select_actions, Action, ActionKind, SsgConfig};
pub use algo::{generate_support_sets, run_ssg, MipsScorer, SsgRun, SupportScorer};
pub use embed::{EmbeddingVector, DEFAULT_DIM, NORM_TOLERANCE};
pub use encoder::{lexical_encoder, tokenize, BiEncoder, LexicalEncoder};
pub use error::SsgError;
pub use index::{build_index, db_digest, mips, IndexedDatabase};
pub use oracle::OracleScorer;
pub use tfidf::tfidf_topk;
