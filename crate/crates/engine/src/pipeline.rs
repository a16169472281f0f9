//! The three-stage pipeline (SSG → SPJ → aggregation) with per-query
//! traces, plus split-level evaluation producing a scored [`Report`].

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use factdb_aggregate::{aggregate_all, AggregateError};
use factdb_core::{render_answer, Answer, Database, Query, SupportSet};
use factdb_datagen::{gold_support_sets, kg_from_db, match_query, read_split, TemplatePack};
use factdb_eval::{LatencyStats, QueryResult, Report};
use factdb_spj::{serialize_derivation, spj_map, OracleSpj, RemoteSpj, RemoteSpjConfig, SpjOperator};
use factdb_ssg::{
    build_index, lexical_encoder, run_ssg, tfidf_topk, IndexedDatabase, LexicalEncoder,
    MipsScorer, OracleScorer, SsgConfig,
};
use serde::Serialize;

use crate::config::{PipelineConfig, RetrievalMode, SpjMode, SsgMode};
use crate::error::EngineError;
use crate::remote::{build_remote_index, EncoderClient, RemoteScorer};

/// Wall-clock stage timings in milliseconds.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StageTimings {
    pub ssg_ms: f64,
    pub spj_ms: f64,
    pub aggregate_ms: f64,
    pub total_ms: f64,
}

/// Everything the pipeline did for one query, serializable for `--trace`.
#[derive(Debug, Clone, Serialize)]
pub struct QueryTrace {
    pub query_id: String,
    pub qtype: factdb_core::QueryType,
    /// Support sets the SSG closed, in canonical order.
    pub support_sets: Vec<SupportSet>,
    /// One serialized derivation per support set, same order.
    pub derivations: Vec<String>,
    /// Wire name of the operator chosen by majority vote; None when
    /// aggregation never ran or failed.
    pub chosen_op: Option<String>,
    /// Aggregation found no usable operands; the answer was rendered as
    /// "NONE".
    pub no_operands: bool,
    /// Aggregation error text, if any (NoOperands or mixed value types).
    pub aggregate_error: Option<String>,
    pub parse_failures: u64,
    /// Per-item SPJ errors degraded to Null by the map stage.
    pub spj_errors: usize,
    pub ssg_state_encodings: usize,
    pub ssg_iterations: usize,
    /// The rendered answer string.
    pub answer: String,
    pub timings: StageTimings,
}

/// Per-database retrieval state, built once and shared by every query
/// against that database.
pub struct DbContext<'a> {
    pub db: &'a Database,
    backend: Backend<'a>,
}

enum Backend<'a> {
    /// `retrieval_mode = perfectir`: gold support sets pass straight through.
    Bypass,
    Gold(OracleScorer),
    Lexical { encoder: LexicalEncoder, index: IndexedDatabase<'a> },
    TfIdf { k: usize },
    Remote { client: EncoderClient, index: IndexedDatabase<'a> },
}

/// Output of the retrieval stage.
struct SsgOutcome {
    sets: BTreeSet<SupportSet>,
    state_encodings: usize,
    iterations: usize,
}

impl<'a> DbContext<'a> {
    /// Build the retrieval backend for `db`. `queries` is the full set of
    /// queries that will run against it (the oracle scorer needs their gold
    /// support sets up front).
    pub fn new(
        db: &'a Database,
        queries: &[Query],
        cfg: &PipelineConfig,
    ) -> Result<DbContext<'a>, EngineError> {
        cfg.validate()?;
        let backend = if cfg.retrieval_mode == RetrievalMode::PerfectIr {
            Backend::Bypass
        } else {
            match cfg.ssg_mode {
                SsgMode::Oracle => Backend::Gold(OracleScorer::new(db, queries)?),
                SsgMode::Lexical => {
                    let encoder = lexical_encoder(db);
                    let index = build_index(db, &encoder)?;
                    Backend::Lexical { encoder, index }
                }
                SsgMode::TfIdf { k } => Backend::TfIdf { k },
                SsgMode::Remote => {
                    let client = EncoderClient::new(cfg.endpoints.encoder.clone(), cfg.dim);
                    let index = build_remote_index(db, &client)?;
                    Backend::Remote { client, index }
                }
            }
        };
        Ok(DbContext { db, backend })
    }

    fn support_sets(&self, query: &Query, cfg: &PipelineConfig) -> Result<SsgOutcome, EngineError> {
        match &self.backend {
            Backend::Bypass => Ok(SsgOutcome {
                sets: query.gold_support_sets.clone(),
                state_encodings: 0,
                iterations: 0,
            }),
            Backend::Gold(scorer) => {
                // Oracle scores are 0/1, so run with the wide oracle bounds
                // rather than the tuned retrieval bounds.
                let run = run_ssg(scorer, query, &SsgConfig::oracle())?;
                Ok(SsgOutcome {
                    sets: run.sets,
                    state_encodings: run.state_encodings,
                    iterations: run.iterations,
                })
            }
            Backend::Lexical { encoder, index } => {
                let scorer = MipsScorer::new(index, encoder);
                let run = run_ssg(&scorer, query, &cfg.ssg)?;
                Ok(SsgOutcome {
                    sets: run.sets,
                    state_encodings: run.state_encodings,
                    iterations: run.iterations,
                })
            }
            Backend::TfIdf { k } => Ok(SsgOutcome {
                sets: tfidf_topk(self.db, query, *k).into_iter().collect(),
                state_encodings: 0,
                iterations: 1,
            }),
            Backend::Remote { client, index } => {
                let scorer = RemoteScorer { index, client };
                let run = run_ssg(&scorer, query, &cfg.ssg)?;
                Ok(SsgOutcome {
                    sets: run.sets,
                    state_encodings: run.state_encodings,
                    iterations: run.iterations,
                })
            }
        }
    }
}

fn spj_operator(cfg: &PipelineConfig) -> Box<dyn SpjOperator> {
    match cfg.spj_mode {
        SpjMode::Oracle => Box::new(OracleSpj),
        // Fresh client per query so parse-failure counters are per-query.
        SpjMode::Remote => Box::new(RemoteSpj::new(RemoteSpjConfig {
            endpoint: cfg.endpoints.spj.clone(),
            timeout: Duration::from_secs(10),
            retries: 2,
            max_in_flight: 8,
        })),
    }
}

/// Run the full pipeline for one query against a prepared context.
pub fn run_query_in(
    ctx: &DbContext<'_>,
    query: &Query,
    cfg: &PipelineConfig,
) -> Result<(Answer, QueryTrace), EngineError> {
    let t_total = Instant::now();

    let t = Instant::now();
    let ssg = ctx.support_sets(query, cfg)?;
    let ssg_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let sets: Vec<SupportSet> = ssg.sets.iter().cloned().collect();
    let op = spj_operator(cfg);
    let output = spj_map(query, &sets, op.as_ref(), ctx.db);
    let parse_failures = op.parse_failures();
    let spj_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let derivations: Vec<_> = output.pairs.iter().map(|(_, d)| d.clone()).collect();
    let (answer, chosen_op, no_operands, aggregate_error) =
        match aggregate_all(&derivations, parse_failures as usize) {
            Ok(res) => (res.answer, Some(res.chosen_op.wire().to_string()), false, None),
            Err(e @ AggregateError::NoOperands(_)) => {
                (Answer::Str("NONE".into()), None, true, Some(e.to_string()))
            }
            Err(e) => (Answer::Str("NONE".into()), None, false, Some(e.to_string())),
        };
    let aggregate_ms = t.elapsed().as_secs_f64() * 1e3;

    let trace = QueryTrace {
        query_id: query.id.clone(),
        qtype: query.qtype,
        support_sets: output.pairs.iter().map(|(s, _)| s.clone()).collect(),
        derivations: output.pairs.iter().map(|(_, d)| serialize_derivation(d)).collect(),
        chosen_op,
        no_operands,
        aggregate_error,
        parse_failures,
        spj_errors: output.errors,
        ssg_state_encodings: ssg.state_encodings,
        ssg_iterations: ssg.iterations,
        answer: render_answer(&answer),
        timings: StageTimings {
            ssg_ms,
            spj_ms,
            aggregate_ms,
            total_ms: t_total.elapsed().as_secs_f64() * 1e3,
        },
    };
    Ok((answer, trace))
}

/// One-shot convenience: build the context for a single query and run it.
pub fn run_query(
    db: &Database,
    query: &Query,
    cfg: &PipelineConfig,
) -> Result<(Answer, QueryTrace), EngineError> {
    let ctx = DbContext::new(db, std::slice::from_ref(query), cfg)?;
    run_query_in(&ctx, query, cfg)
}

/// Resolve an ad-hoc natural-language question against a fact database:
/// match it to a query template, recover its semantics, and derive gold
/// support sets from the grounding triples (needed by the oracle and
/// perfectir paths).
pub fn resolve_query(
    db: &Database,
    pack: &TemplatePack,
    text: &str,
) -> Result<Query, EngineError> {
    let kg = kg_from_db(db);
    let matched = match_query(pack, &kg, text).ok_or_else(|| {
        EngineError::Data(format!("question does not match any known template: {text:?}"))
    })?;
    let gold = gold_support_sets(&kg, db, matched.qtype, &matched.semantics)?;
    Ok(Query {
        id: "adhoc-1".into(),
        text: factdb_core::collapse_whitespace(text),
        qtype: matched.qtype,
        template_id: matched.template_id,
        gold_answer: None,
        gold_support_sets: gold,
        semantics: Some(matched.semantics),
    })
}

/// Options for [`run_split_opts`].
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Split file name (without extension) when the path is a dataset
    /// directory.
    pub split: String,
    /// Collect per-query traces in the outcome.
    pub collect_traces: bool,
}

impl Default for RunOptions {
    fn default() -> RunOptions {
        RunOptions { split: "test".into(), collect_traces: false }
    }
}

pub struct SplitOutcome {
    pub report: Report,
    /// Per-query traces in evaluation order; empty unless requested.
    pub traces: Vec<QueryTrace>,
}

/// Resolve the split files under `path`: either a single split file, or a
/// dataset directory holding `size-N/<split>.jsonl` files (evaluated in
/// ascending size order).
pub fn split_files(path: &Path, split: &str) -> Result<Vec<PathBuf>, EngineError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    if !path.is_dir() {
        return Err(EngineError::Data(format!("no such file or directory: {}", path.display())));
    }
    let mut sized: Vec<(u32, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(path)? {
        let entry = entry?;
        let name = entry.file_name();
        let Some(size) = name.to_string_lossy().strip_prefix("size-").and_then(|s| s.parse().ok())
        else {
            continue;
        };
        let file = entry.path().join(format!("{split}.jsonl"));
        if file.is_file() {
            sized.push((size, file));
        }
    }
    sized.sort();
    if sized.is_empty() {
        return Err(EngineError::Data(format!(
            "no size-*/{split}.jsonl files under {}",
            path.display()
        )));
    }
    Ok(sized.into_iter().map(|(_, f)| f).collect())
}

fn evaluate_one(
    ctx: &DbContext<'_>,
    query: &Query,
    cfg: &PipelineConfig,
) -> Result<(QueryResult, QueryTrace), EngineError> {
    let (predicted, trace) = run_query_in(ctx, query, cfg)?;
    let gold = query.gold_answer.clone().ok_or_else(|| {
        EngineError::Data(format!("query {} has no gold answer; cannot score it", query.id))
    })?;
    let result = QueryResult {
        query_id: query.id.clone(),
        qtype: query.qtype,
        db_size: ctx.db.len() as u32,
        predicted,
        gold,
        predicted_support: trace.support_sets.iter().cloned().collect(),
        gold_support: query.gold_support_sets.clone(),
        parse_failures: trace.parse_failures as usize,
    };
    Ok((result, trace))
}

/// Evaluate every query of a split and score it. `path` may be a split file
/// or a dataset directory (see [`split_files`]). Deterministic for a fixed
/// config: the report's stable form is byte-identical for any worker count.
pub fn run_split_opts(
    path: &Path,
    cfg: &PipelineConfig,
    opts: &RunOptions,
) -> Result<SplitOutcome, EngineError> {
    cfg.validate()?;
    let files = split_files(path, &opts.split)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.worker_count).build()?;

    let mut results: Vec<QueryResult> = Vec::new();
    let mut traces: Vec<QueryTrace> = Vec::new();
    let mut samples: std::collections::BTreeMap<u32, Vec<f64>> = std::collections::BTreeMap::new();

    for file in &files {
        for entry in read_split(file)? {
            let ctx = DbContext::new(&entry.db, &entry.queries, cfg)?;
            let items: Vec<(QueryResult, QueryTrace)> = pool.install(|| {
                use rayon::prelude::*;
                entry
                    .queries
                    .par_iter()
                    .map(|q| evaluate_one(&ctx, q, cfg))
                    .collect::<Result<Vec<_>, EngineError>>()
            })?;
            for (result, trace) in items {
                samples.entry(result.db_size).or_default().push(trace.timings.total_ms);
                if opts.collect_traces {
                    traces.push(trace);
                }
                results.push(result);
            }
        }
    }

    let mut report = Report::from_results(&results)?;
    for (db_size, sample) in &samples {
        report.set_latency(*db_size, LatencyStats::from_samples(sample));
    }
    Ok(SplitOutcome { report, traces })
}

/// Evaluate the test split under `path` with default options.
pub fn run_split(path: &Path, cfg: &PipelineConfig) -> Result<Report, EngineError> {
    run_split_opts(path, cfg, &RunOptions::default()).map(|o| o.report)
}
