use std::collections::BTreeSet;

use factdb_core::{answer_equal, canonicalize_answer, Answer, SupportSet};
use serde::{Deserialize, Serialize};

use crate::error::EvalError;

/// How a predicted support set may match a gold one: exactly equal, or a
/// superset of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Exact,
    Soft,
}

/// Exact match: 1 iff the canonical forms are equal. Cross-variant
/// comparisons canonicalize first, so `Str("2")` matches `Num(2)` and
/// `Str("TRUE")` matches `Bool(true)`. Set-valued gold answers are scored
/// with [`set_f1`], not EM.
pub fn exact_match(pred: &Answer, gold: &Answer) -> Result<u8, EvalError> {
    if matches!(gold, Answer::StrSet(_)) {
        return Err(EvalError::SetGold);
    }
    Ok(u8::from(answer_equal(pred, gold)))
}

/// F1 over set elements under exact element match. Both empty → 1.0;
/// exactly one empty → 0.0. A non-set prediction against a set gold scores
/// 0.0 (wrong shape); a non-set gold is an error (use [`exact_match`]).
pub fn set_f1(pred: &Answer, gold: &Answer) -> Result<f64, EvalError> {
    let Answer::StrSet(_) = gold else {
        return Err(EvalError::ScalarGold);
    };
    let Answer::StrSet(gold_set) = canonicalize_answer(gold) else { unreachable!() };
    let pred_set: BTreeSet<String> = match canonicalize_answer(pred) {
        Answer::StrSet(s) => s,
        _ => return Ok(0.0),
    };
    if pred_set.is_empty() && gold_set.is_empty() {
        return Ok(1.0);
    }
    if pred_set.is_empty() || gold_set.is_empty() {
        return Ok(0.0);
    }
    let overlap = pred_set.intersection(&gold_set).count() as f64;
    let precision = overlap / pred_set.len() as f64;
    let recall = overlap / gold_set.len() as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Per-query Answer Accuracy score in [0,1]: exact match for scalar gold
/// answers, set F1 for set gold answers.
pub fn answer_score(pred: &Answer, gold: &Answer) -> f64 {
    match gold {
        Answer::StrSet(_) => set_f1(pred, gold).expect("gold is a set"),
        _ => f64::from(exact_match(pred, gold).expect("gold is scalar")),
    }
}

/// Precision and recall of predicted support sets against gold ones.
///
/// A predicted set matches a gold set iff equal (exact mode) or iff it is a
/// superset of it (soft mode). Matching is many-to-many. P = fraction of
/// predicted sets matching at least one gold set, R = fraction of gold sets
/// matched by at least one predicted set. Zero predictions give P = 1 (and
/// R = 0 unless gold is also empty); zero gold sets give R = 1.
pub fn ssg_precision_recall(
    pred: &BTreeSet<SupportSet>,
    gold: &BTreeSet<SupportSet>,
    mode: MatchMode,
) -> (f64, f64) {
    let matches = |p: &SupportSet, g: &SupportSet| match mode {
        MatchMode::Exact => p == g,
        MatchMode::Soft => g.is_subset(p),
    };
    let precision = if pred.is_empty() {
        1.0
    } else {
        pred.iter().filter(|p| gold.iter().any(|g| matches(p, g))).count() as f64
            / pred.len() as f64
    };
    let recall = if gold.is_empty() {
        1.0
    } else {
        gold.iter().filter(|g| pred.iter().any(|p| matches(p, g))).count() as f64
            / gold.len() as f64
    };
    (precision, recall)
}
