use std::collections::{BTreeMap, BTreeSet};

use factdb_core::{Database, Fact, Query};

use crate::embed::{basis, EmbeddingVector, DEFAULT_DIM};

/// Bi-encoder pair: the fact side and the state side are encoded
/// independently and compared by inner product, so fact vectors can be
/// precomputed once per database. The STOP action lives in the same space as
/// a dedicated row.
pub trait BiEncoder {
    /// Shared embedding dimension of both sides.
    fn dim(&self) -> usize;

    /// Encode one fact. Must be deterministic in the fact alone.
    fn encode_fact(&self, fact: &Fact) -> EmbeddingVector;

    /// Encode the state: the query plus the facts already in the partial
    /// support set, given in fact-id order.
    fn encode_state(&self, query: &Query, partial: &[&Fact]) -> EmbeddingVector;

    /// Fixed vector of the STOP action.
    fn stop_vector(&self) -> EmbeddingVector;
}

/// Lowercased maximal alphanumeric runs; everything else is a separator.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// FNV-1a over the token bytes; stable across platforms and releases, unlike
/// the std hasher.
fn fnv1a(token: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in token.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// TF·IDF bi-encoder over hashed bags of tokens.
///
/// Layout: coordinates `0..dim-1` carry the hashed token mass, the final
/// coordinate is reserved for STOP. Fact vectors put zero on the STOP
/// coordinate. State vectors encode the *residual* of the query — the query
/// tokens not yet covered by the partial support set — scaled so that the
/// STOP coordinate equals the covered fraction `c` and the content part has
/// norm `sqrt(1 - c²)`. The STOP score (inner product with the STOP basis
/// vector) therefore rises from 0 toward 1 as the partial set covers the
/// query, and facts repeating already-covered content stop attracting mass.
pub struct LexicalEncoder {
    dim: usize,
    idf: BTreeMap<String, f64>,
}

impl LexicalEncoder {
    /// Fit IDF weights on the database with the default dimension.
    pub fn fit(db: &Database) -> LexicalEncoder {
        LexicalEncoder::fit_with_dim(db, DEFAULT_DIM)
    }

    /// Fit with an explicit dimension (≥ 2: at least one content coordinate
    /// plus the STOP coordinate).
    pub fn fit_with_dim(db: &Database, dim: usize) -> LexicalEncoder {
        assert!(dim >= 2, "lexical encoder needs >= 2 dims");
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for fact in db.facts() {
            let unique: BTreeSet<String> = tokenize(&fact.text).into_iter().collect();
            for token in unique {
                *df.entry(token).or_insert(0) += 1;
            }
        }
        let n_docs = db.len() as f64;
        let idf = df
            .into_iter()
            .map(|(token, df)| {
                (token, ((1.0 + n_docs) / (1.0 + df as f64)).ln() + 1.0)
            })
            .collect();
        LexicalEncoder { dim, idf }
    }

    fn content_dims(&self) -> usize {
        self.dim - 1
    }

    /// Hashed TF·IDF bag over the content coordinates. Tokens unseen at fit
    /// time carry no IDF weight and are dropped — they can never be covered
    /// by a fact, so keeping them would only stop STOP from firing.
    fn bag(&self, tokens: &[String]) -> Vec<f64> {
        let mut counts: BTreeMap<&str, f64> = BTreeMap::new();
        for token in tokens {
            *counts.entry(token).or_insert(0.0) += 1.0;
        }
        let mut v = vec![0.0; self.content_dims()];
        for (token, tf) in counts {
            if let Some(idf) = self.idf.get(token) {
                let bucket = (fnv1a(token) % self.content_dims() as u64) as usize;
                v[bucket] += tf * idf;
            }
        }
        v
    }
}

fn l2(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl BiEncoder for LexicalEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode_fact(&self, fact: &Fact) -> EmbeddingVector {
        let bag = self.bag(&tokenize(&fact.text));
        let mut v: Vec<f32> = bag.iter().map(|&x| x as f32).collect();
        v.push(0.0);
        EmbeddingVector::normalized(v).expect("fact bag is finite")
    }

    fn encode_state(&self, query: &Query, partial: &[&Fact]) -> EmbeddingVector {
        let query_tokens: Vec<String> = tokenize(&query.text)
            .into_iter()
            .filter(|t| self.idf.contains_key(t))
            .collect();
        let covered: BTreeSet<String> = partial
            .iter()
            .flat_map(|f| tokenize(&f.text))
            .collect();
        let residual: Vec<String> = query_tokens
            .iter()
            .filter(|t| !covered.contains(*t))
            .cloned()
            .collect();

        let query_bag = self.bag(&query_tokens);
        let residual_bag = self.bag(&residual);
        let query_mass = l2(&query_bag);
        let residual_mass = l2(&residual_bag);
        let coverage = if query_mass == 0.0 {
            1.0
        } else {
            (1.0 - residual_mass / query_mass).clamp(0.0, 1.0)
        };

        let mut v = vec![0.0f32; self.dim];
        if residual_mass > 0.0 {
            let scale = (1.0 - coverage * coverage).max(0.0).sqrt();
            for (slot, mass) in v.iter_mut().zip(&residual_bag) {
                *slot = ((mass / residual_mass) * scale) as f32;
            }
        }
        v[self.dim - 1] = coverage as f32;
        EmbeddingVector::normalized(v).expect("state bag is finite")
    }

    fn stop_vector(&self) -> EmbeddingVector {
        basis(self.dim, self.dim - 1)
    }
}

/// Build the TF·IDF bi-encoder for a database.
pub fn lexical_encoder(db: &Database) -> LexicalEncoder {
    LexicalEncoder::fit(db)
}
