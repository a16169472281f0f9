//! Training-record emission for the two learned components: the SPJ
//! operator (text-to-derivation pairs with verified negatives/distractors)
//! and the support-set generator (full supervision over all partial states
//! of every gold set).

use std::collections::BTreeSet;

use factdb_core::{Database, FactId, Query, SupportSet};
use rand::Rng;
use serde::{Deserialize, Serialize};

use factdb_spj::{oracle_spj, serialize_derivation, Derivation};

use crate::error::DatagenError;
use crate::rng::rng_from;

/// One SPJ seq2seq example: the support facts' text plus the query text map
/// to a derivation string (or literal "NULL").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpjTrainingRecord {
    pub db_id: String,
    pub query_id: String,
    pub query: String,
    pub facts: Vec<String>,
    pub target: String,
}

/// One SSG supervision state: a partial support set and the actions that
/// extend it toward the gold set it came from (`stop` when complete).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsgTrainingRecord {
    pub db_id: String,
    pub query_id: String,
    pub query: String,
    pub state: Vec<FactId>,
    pub positive_next: Vec<FactId>,
    pub stop: bool,
}

/// Negative/distractor mix for SPJ training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegConfig {
    /// Type-1 negatives (random facts, target NULL) per positive.
    pub negative_ratio: f64,
    /// Fraction of positives that also get 1–3 distractor facts appended
    /// (type-2; target unchanged).
    pub distractor_rate: f64,
}

impl Default for NegConfig {
    fn default() -> Self {
        NegConfig { negative_ratio: 1.0, distractor_rate: 0.25 }
    }
}

fn texts_for(db: &Database, ids: impl Iterator<Item = FactId>) -> Vec<String> {
    ids.map(|id| db.get(id).expect("validated fact id").text.clone()).collect()
}

/// Sample up to `n` fact ids outside `exclude`, uniformly without
/// replacement.
fn sample_outside(
    db: &Database,
    exclude: &SupportSet,
    n: usize,
    rng: &mut impl Rng,
) -> Vec<FactId> {
    let candidates: Vec<FactId> = db
        .facts()
        .iter()
        .map(|f| f.id)
        .filter(|id| !exclude.contains(*id))
        .collect();
    let mut picked = BTreeSet::new();
    let mut out = Vec::new();
    if candidates.is_empty() {
        return out;
    }
    for _ in 0..n * 4 {
        if out.len() == n {
            break;
        }
        let id = candidates[rng.random_range(0..candidates.len())];
        if picked.insert(id) {
            out.push(id);
        }
    }
    out
}

/// Emit SPJ training records for one database's queries. Positives target
/// the oracle derivation for each gold set; type-1 negatives are random
/// support sets verified to derive Null; type-2 positives get distractors
/// appended, verified not to change the derivation.
pub fn emit_spj_training(
    db: &Database,
    queries: &[Query],
    neg: NegConfig,
    seed: u64,
    db_id: &str,
) -> Result<Vec<SpjTrainingRecord>, DatagenError> {
    let mut rng = rng_from(seed);
    let mut records = Vec::new();
    let mut negatives_owed = 0.0f64;

    for query in queries {
        for set in &query.gold_support_sets {
            let derivation = oracle_spj(query, set, db)?;
            let target = serialize_derivation(&derivation);

            let mut ids: Vec<FactId> = set.ids().collect();
            if rng.random::<f64>() < neg.distractor_rate {
                // Type-2: append distractors that leave the oracle's
                // derivation unchanged (verified; resampled a few times).
                for _ in 0..20 {
                    let extra = sample_outside(db, set, rng.random_range(1..=3), &mut rng);
                    if extra.is_empty() {
                        break;
                    }
                    let augmented: SupportSet = set.ids().chain(extra.iter().copied()).collect();
                    if oracle_spj(query, &augmented, db)? == derivation {
                        ids = augmented.ids().collect();
                        break;
                    }
                }
            }
            records.push(SpjTrainingRecord {
                db_id: db_id.to_string(),
                query_id: query.id.clone(),
                query: query.text.clone(),
                facts: texts_for(db, ids.into_iter()),
                target: target.clone(),
            });

            // Type-1: random sets that derive Null, at negative_ratio per
            // positive.
            negatives_owed += neg.negative_ratio;
            while negatives_owed >= 1.0 {
                negatives_owed -= 1.0;
                for _ in 0..20 {
                    let ids =
                        sample_outside(db, &SupportSet::new(), rng.random_range(1..=3), &mut rng);
                    if ids.is_empty() {
                        break;
                    }
                    let random_set: SupportSet = ids.iter().copied().collect();
                    if oracle_spj(query, &random_set, db)? == Derivation::Null {
                        records.push(SpjTrainingRecord {
                            db_id: db_id.to_string(),
                            query_id: query.id.clone(),
                            query: query.text.clone(),
                            facts: texts_for(db, ids.into_iter()),
                            target: serialize_derivation(&Derivation::Null),
                        });
                        break;
                    }
                }
            }
        }
    }
    Ok(records)
}

/// Emit SSG supervision for one database's queries: for every gold set S,
/// every subset of S becomes a state whose positive actions are the
/// missing facts — or STOP when the state equals S.
pub fn emit_ssg_training(db: &Database, queries: &[Query], db_id: &str) -> Vec<SsgTrainingRecord> {
    let _ = db;
    let mut records = Vec::new();
    for query in queries {
        for set in &query.gold_support_sets {
            let ids: Vec<FactId> = set.ids().collect();
            let n = ids.len();
            for mask in 0u32..(1 << n) {
                let state: Vec<FactId> = (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| ids[i])
                    .collect();
                let missing: Vec<FactId> = (0..n)
                    .filter(|i| mask & (1 << i) == 0)
                    .map(|i| ids[i])
                    .collect();
                let stop = missing.is_empty();
                records.push(SsgTrainingRecord {
                    db_id: db_id.to_string(),
                    query_id: query.id.clone(),
                    query: query.text.clone(),
                    state,
                    positive_next: missing,
                    stop,
                });
            }
        }
    }
    records
}
