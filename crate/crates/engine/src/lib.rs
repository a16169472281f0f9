//! End-to-end query engine over natural-language fact databases.
//!
//! Wires the pipeline stages — support-set generation, select-project-join,
//! and exact aggregation — into runnable configurations, and exposes the
//! `factdb` CLI: dataset generation, index persistence, one-shot and
//! interactive querying, split evaluation, benchmarking, and a loopback
//! stub for the remote encoder/SPJ protocols.

pub mod cli;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod remote;
pub mod stub;

pub use config::{
    AppConfig, Endpoints, PipelineConfig, RetrievalMode, SpjMode, SsgMode, DEFAULT_TFIDF_K,
};
pub use error::EngineError;
pub use pipeline::{
    resolve_query, run_query, run_query_in, run_split, run_split_opts, split_files, DbContext,
    QueryTrace, RunOptions, SplitOutcome, StageTimings,
};
pub use remote::{build_remote_index, state_text, EncoderClient, RemoteScorer};
pub use stub::{serve, spawn_stub, stub_encode, SpjBehavior, StubOptions};
