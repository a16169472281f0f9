use std::collections::BTreeMap;

use factdb_core::{Database, Query, SupportSet};

use crate::encoder::tokenize;

/// Primitive single-fact retriever: rank facts by cosine TF·IDF similarity
/// to the query text and return the top `k` as singleton support sets, ties
/// broken by fact id. Exact token space (no hashing) — this is the baseline,
/// not the bi-encoder.
pub fn tfidf_topk(db: &Database, query: &Query, k: usize) -> Vec<SupportSet> {
    if k == 0 || db.is_empty() {
        return Vec::new();
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    let mut fact_tokens: Vec<BTreeMap<String, f64>> = Vec::with_capacity(db.len());
    for fact in db.facts() {
        let mut counts: BTreeMap<String, f64> = BTreeMap::new();
        for token in tokenize(&fact.text) {
            *counts.entry(token).or_insert(0.0) += 1.0;
        }
        for token in counts.keys() {
            *df.entry(token.clone()).or_insert(0) += 1;
        }
        fact_tokens.push(counts);
    }
    let n_docs = db.len() as f64;
    let idf =
        |token: &str| ((1.0 + n_docs) / (1.0 + *df.get(token).unwrap_or(&0) as f64)).ln() + 1.0;

    let mut query_vec: BTreeMap<String, f64> = BTreeMap::new();
    for token in tokenize(&query.text) {
        *query_vec.entry(token).or_insert(0.0) += 1.0;
    }
    for (token, tf) in query_vec.iter_mut() {
        *tf *= idf(token);
    }
    let query_norm = query_vec.values().map(|w| w * w).sum::<f64>().sqrt();

    let mut scored: Vec<(f64, &factdb_core::Fact)> = Vec::with_capacity(db.len());
    for (fact, counts) in db.facts().iter().zip(&fact_tokens) {
        let weights: BTreeMap<&String, f64> =
            counts.iter().map(|(t, tf)| (t, tf * idf(t))).collect();
        let fact_norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        let mut dot = 0.0;
        for (token, qw) in &query_vec {
            if let Some(fw) = weights.get(token) {
                dot += qw * fw;
            }
        }
        let score = if query_norm > 0.0 && fact_norm > 0.0 {
            dot / (query_norm * fact_norm)
        } else {
            0.0
        };
        scored.push((score, fact));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));
    scored
        .into_iter()
        .take(k)
        .map(|(_, fact)| SupportSet::singleton(fact.id))
        .collect()
}
