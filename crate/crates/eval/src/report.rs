use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use factdb_core::{Answer, QueryType, SupportSet};
use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::metrics::{answer_score, ssg_precision_recall, MatchMode};

/// Everything needed to score one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub query_id: String,
    pub qtype: QueryType,
    /// Size (fact count) of the database the query ran against; used for the
    /// per-size scaling table.
    pub db_size: u32,
    pub predicted: Answer,
    pub gold: Answer,
    #[serde(default)]
    pub predicted_support: BTreeSet<SupportSet>,
    #[serde(default)]
    pub gold_support: BTreeSet<SupportSet>,
    #[serde(default)]
    pub parse_failures: usize,
}

/// Latency summary in milliseconds. Filled by the runner; zeroed in
/// [`Report::stable_json`] so byte-level comparisons ignore wall-clock.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

impl LatencyStats {
    /// Summarize raw per-query latencies (any order).
    pub fn from_samples(samples_ms: &[f64]) -> LatencyStats {
        if samples_ms.is_empty() {
            return LatencyStats::default();
        }
        let mut sorted = samples_ms.to_vec();
        sorted.sort_by(f64::total_cmp);
        let pick = |q: f64| sorted[((sorted.len() - 1) as f64 * q).round() as usize];
        LatencyStats {
            mean_ms: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p50_ms: pick(0.5),
            p95_ms: pick(0.95),
            max_ms: sorted[sorted.len() - 1],
        }
    }
}

/// One row of the per-DB-size scaling table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SizeRow {
    pub n_queries: usize,
    /// Macro Answer Accuracy over the queries of this size, in percent.
    pub accuracy: f64,
    #[serde(default)]
    pub latency: LatencyStats,
}

/// SSG support-set retrieval quality, macro-averaged over queries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SsgMetrics {
    pub exact_precision: f64,
    pub exact_recall: f64,
    pub soft_precision: f64,
    pub soft_recall: f64,
}

/// Evaluation report: Answer Accuracy overall and per query type (percent),
/// SSG precision/recall under exact and soft matching (rates in [0,1]),
/// parse-failure rate, and per-DB-size accuracy/latency rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub n_queries: usize,
    pub overall_accuracy: f64,
    pub per_type_accuracy: BTreeMap<String, f64>,
    pub ssg: SsgMetrics,
    pub parse_failure_rate: f64,
    pub per_size: BTreeMap<u32, SizeRow>,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Macro Answer Accuracy: per-query score (EM or set F1 by gold shape)
/// averaged over all queries and within each query type, in percent.
pub fn answer_accuracy(results: &[QueryResult]) -> (f64, BTreeMap<String, f64>) {
    let mut sum = 0.0;
    let mut by_type: BTreeMap<QueryType, (f64, usize)> = BTreeMap::new();
    for r in results {
        let score = answer_score(&r.predicted, &r.gold);
        sum += score;
        let slot = by_type.entry(r.qtype).or_insert((0.0, 0));
        slot.0 += score;
        slot.1 += 1;
    }
    let overall = if results.is_empty() { 0.0 } else { 100.0 * sum / results.len() as f64 };
    let per_type = by_type
        .into_iter()
        .map(|(t, (s, n))| (t.label().to_string(), 100.0 * s / n as f64))
        .collect();
    (overall, per_type)
}

impl Report {
    /// Assemble a report from per-query results. Latency rows start zeroed;
    /// runners fill them via [`Report::set_latency`]. Duplicate query ids
    /// are an error.
    pub fn from_results(results: &[QueryResult]) -> Result<Report, EvalError> {
        let mut seen = BTreeSet::new();
        for r in results {
            if !seen.insert(&r.query_id) {
                return Err(EvalError::DuplicateId(r.query_id.clone()));
            }
        }
        let (overall, per_type) = answer_accuracy(results);

        let mut ssg = SsgMetrics::default();
        for r in results {
            let (pe, re) =
                ssg_precision_recall(&r.predicted_support, &r.gold_support, MatchMode::Exact);
            let (ps, rs) =
                ssg_precision_recall(&r.predicted_support, &r.gold_support, MatchMode::Soft);
            ssg.exact_precision += pe;
            ssg.exact_recall += re;
            ssg.soft_precision += ps;
            ssg.soft_recall += rs;
        }
        if !results.is_empty() {
            let n = results.len() as f64;
            ssg.exact_precision /= n;
            ssg.exact_recall /= n;
            ssg.soft_precision /= n;
            ssg.soft_recall /= n;
        }

        let with_failures = results.iter().filter(|r| r.parse_failures > 0).count();
        let parse_failure_rate = if results.is_empty() {
            0.0
        } else {
            with_failures as f64 / results.len() as f64
        };

        let mut per_size: BTreeMap<u32, SizeRow> = BTreeMap::new();
        let mut size_groups: BTreeMap<u32, Vec<&QueryResult>> = BTreeMap::new();
        for r in results {
            size_groups.entry(r.db_size).or_default().push(r);
        }
        for (size, group) in size_groups {
            let sum: f64 = group.iter().map(|r| answer_score(&r.predicted, &r.gold)).sum();
            per_size.insert(
                size,
                SizeRow {
                    n_queries: group.len(),
                    accuracy: 100.0 * sum / group.len() as f64,
                    latency: LatencyStats::default(),
                },
            );
        }

        Ok(Report {
            schema_version: REPORT_SCHEMA_VERSION,
            n_queries: results.len(),
            overall_accuracy: overall,
            per_type_accuracy: per_type,
            ssg,
            parse_failure_rate,
            per_size,
        })
    }

    /// Attach measured latency to one size row (creating it if absent).
    pub fn set_latency(&mut self, db_size: u32, latency: LatencyStats) {
        self.per_size.entry(db_size).or_default().latency = latency;
    }

    /// Pretty JSON with wall-clock fields zeroed — byte-stable across runs
    /// of the same deterministic pipeline.
    pub fn stable_json(&self) -> String {
        let mut copy = self.clone();
        for row in copy.per_size.values_mut() {
            row.latency = LatencyStats::default();
        }
        serde_json::to_string_pretty(&copy).expect("report serializes")
    }

    /// Full JSON including latency.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "queries evaluated      {:>10}", self.n_queries);
        let _ = writeln!(out, "overall accuracy       {:>10.2}", self.overall_accuracy);
        for (label, acc) in &self.per_type_accuracy {
            let _ = writeln!(out, "  {label:<20} {acc:>10.2}");
        }
        let _ = writeln!(
            out,
            "ssg exact P/R          {:>10.4} {:>10.4}",
            self.ssg.exact_precision, self.ssg.exact_recall
        );
        let _ = writeln!(
            out,
            "ssg soft  P/R          {:>10.4} {:>10.4}",
            self.ssg.soft_precision, self.ssg.soft_recall
        );
        let _ = writeln!(out, "parse-failure rate     {:>10.4}", self.parse_failure_rate);
        if !self.per_size.is_empty() {
            let _ = writeln!(
                out,
                "{:>8} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
                "db_size", "queries", "accuracy", "mean_ms", "p50_ms", "p95_ms", "max_ms"
            );
            for (size, row) in &self.per_size {
                let _ = writeln!(
                    out,
                    "{size:>8} {:>9} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
                    row.n_queries,
                    row.accuracy,
                    row.latency.mean_ms,
                    row.latency.p50_ms,
                    row.latency.p95_ms,
                    row.latency.max_ms,
                );
            }
        }
        out
    }

    /// Per-size scaling table as CSV.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("db_size,n_queries,accuracy,mean_ms,p50_ms,p95_ms,max_ms\n");
        for (size, row) in &self.per_size {
            let _ = writeln!(
                out,
                "{size},{},{:.4},{:.3},{:.3},{:.3},{:.3}",
                row.n_queries,
                row.accuracy,
                row.latency.mean_ms,
                row.latency.p50_ms,
                row.latency.p95_ms,
                row.latency.max_ms,
            );
        }
        out
    }
}
