//! Evaluation: Exact Match, set F1, macro Answer Accuracy per query type,
//! and SSG support-set precision/recall under exact and soft matching, plus
//! the assembled [`Report`] with JSON/text/CSV renderings.

mod error;
mod metrics;
mod report;

pub use error::EvalError;
pub use metrics::{answer_score, exact_match, set_f1, ssg_precision_recall, MatchMode};
pub use report::{
    answer_accuracy, LatencyStats, QueryResult, Report, SizeRow, SsgMetrics,
    REPORT_SCHEMA_VERSION,
};
