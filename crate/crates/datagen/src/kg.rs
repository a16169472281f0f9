//! Synthetic knowledge graph: deterministic plan + generation, plus the
//! tab-separated ingest/export path for user-supplied triples.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use factdb_core::{Database, Triple, Value};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::DatagenError;
use crate::pack::{ObjectType, TemplatePack};
use crate::rng::rng_from;
use crate::GenConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeGraph {
    /// entity name → pool type ("person", "city", ... or "entity" when
    /// ingested without pool information).
    pub entities: BTreeMap<String, String>,
    pub triples: BTreeSet<Triple>,
}

impl KnowledgeGraph {
    pub fn new() -> KnowledgeGraph {
        KnowledgeGraph { entities: BTreeMap::new(), triples: BTreeSet::new() }
    }

    pub fn relations(&self) -> BTreeSet<&str> {
        self.triples.iter().map(|t| t.relation.as_str()).collect()
    }

    /// All triples matching (subject?, relation, object?).
    pub fn matches<'a>(
        &'a self,
        relation: &str,
        subject: Option<&str>,
        object: Option<&Value>,
    ) -> Vec<&'a Triple> {
        self.triples
            .iter()
            .filter(|t| {
                t.relation == relation
                    && subject.is_none_or(|s| t.subject == s)
                    && object.is_none_or(|o| t.object == *o)
            })
            .collect()
    }

    /// Every triple's subject (and entity-valued object) must be a known
    /// entity.
    pub fn validate(&self) -> Result<(), DatagenError> {
        for t in &self.triples {
            if !self.entities.contains_key(&t.subject) {
                return Err(DatagenError::Pack(format!("unknown subject entity {:?}", t.subject)));
            }
            if let Value::Entity(name) = &t.object {
                if !self.entities.contains_key(name) {
                    return Err(DatagenError::Pack(format!("unknown object entity {name:?}")));
                }
            }
        }
        Ok(())
    }
}

impl Default for KnowledgeGraph {
    fn default() -> Self {
        Self::new()
    }
}

/// Deterministic generation plan: exact triple quota per relation and exact
/// roster size per entity pool. `generate_kg` follows the plan to the
/// letter, which is what makes the ±0 count assertions possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KgPlan {
    pub db_size: u32,
    /// relation id → number of triples (sums to db_size).
    pub quotas: BTreeMap<String, u32>,
    /// pool type → number of distinct entities.
    pub rosters: BTreeMap<String, u32>,
}

impl KgPlan {
    pub fn new(pack: &TemplatePack, db_size: u32) -> KgPlan {
        let n = pack.relations.len() as u32;
        let base = db_size / n;
        let rem = (db_size % n) as usize;
        let mut quotas = BTreeMap::new();
        for (i, r) in pack.relations.iter().enumerate() {
            quotas.insert(r.id.clone(), base + u32::from(i < rem));
        }

        // Subject slots and the strictest functional quota per pool.
        let mut slots: BTreeMap<&str, u32> = BTreeMap::new();
        let mut functional_max: BTreeMap<&str, u32> = BTreeMap::new();
        let mut object_quota: BTreeMap<&str, u32> = BTreeMap::new();
        for r in &pack.relations {
            let q = quotas[&r.id];
            *slots.entry(r.subject_type.as_str()).or_insert(0) += q;
            if r.functional {
                let e = functional_max.entry(r.subject_type.as_str()).or_insert(0);
                *e = (*e).max(q);
            }
            if let ObjectType::Entity { pool } = &r.object_type {
                let e = object_quota.entry(pool.as_str()).or_insert(0);
                *e = (*e).max(q);
            }
        }

        let mut rosters = BTreeMap::new();
        for pool in pack.entity_pools.keys() {
            let s = slots.get(pool.as_str()).copied().unwrap_or(0);
            let size = if s > 0 {
                // Subject pool: about two facts per entity, but functional
                // relations need one distinct subject per triple.
                functional_max
                    .get(pool.as_str())
                    .copied()
                    .unwrap_or(0)
                    .max(s.div_ceil(2))
            } else if let Some(&q) = object_quota.get(pool.as_str()) {
                // Object-only pool (join terminals): keep it small so
                // terminals aggregate several matches.
                q.div_ceil(3).max(2)
            } else {
                0
            };
            if size > 0 {
                rosters.insert(pool.clone(), size);
            }
        }
        KgPlan { db_size, quotas, rosters }
    }

    pub fn total_entities(&self) -> u32 {
        self.rosters.values().sum()
    }
}

/// Cycling deck of names; consecutive windows of length ≤ len are
/// duplicate-free.
struct Deck {
    names: Vec<String>,
    cursor: usize,
}

impl Deck {
    fn take(&mut self, n: usize) -> Vec<String> {
        (0..n)
            .map(|_| {
                let name = self.names[self.cursor % self.names.len()].clone();
                self.cursor += 1;
                name
            })
            .collect()
    }
}

/// Generate one database-sized knowledge graph. Pure function of
/// (config, db_size, seed).
pub fn generate_kg(
    config: &GenConfig,
    db_size: u32,
    seed: u64,
) -> Result<KnowledgeGraph, DatagenError> {
    let pack = &config.pack;
    if pack.relations.is_empty() {
        return Err(DatagenError::Config("config has zero relations".into()));
    }
    if db_size == 0 {
        return Err(DatagenError::Config("db_size must be positive".into()));
    }
    let plan = KgPlan::new(pack, db_size);
    let mut rng = rng_from(seed);

    // Rosters: contiguous pool-index ranges starting at a per-DB offset.
    let mut rosters: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (ptype, size) in &plan.rosters {
        let pool = &pack.entity_pools[ptype];
        let capacity = pool.prefixes.len() * pool.suffixes.len().max(1);
        let offset = rng.random_range(0..capacity);
        let names = (0..*size as usize).map(|i| pool.name(offset + i)).collect();
        rosters.insert(ptype.clone(), names);
    }

    // Shuffled subject decks, one per pool; relations deal from them in
    // pack order so every roster member receives at least one fact.
    let mut decks: BTreeMap<String, Deck> = rosters
        .iter()
        .map(|(t, names)| {
            let mut shuffled = names.clone();
            shuffled.shuffle(&mut rng);
            (t.clone(), Deck { names: shuffled, cursor: 0 })
        })
        .collect();

    // Pools never used as a subject need explicit object-side coverage.
    let subject_pools: BTreeSet<&str> =
        pack.relations.iter().map(|r| r.subject_type.as_str()).collect();

    let mut triples: BTreeSet<Triple> = BTreeSet::new();
    let mut edges: BTreeMap<(String, String), BTreeSet<String>> = BTreeMap::new();
    for relation in &pack.relations {
        let quota = plan.quotas[&relation.id] as usize;
        if quota == 0 {
            continue;
        }
        let subjects = decks
            .get_mut(&relation.subject_type)
            .ok_or_else(|| DatagenError::Config(format!("empty pool {}", relation.subject_type)))?
            .take(quota);

        // Pre-build the object sequence for entity objects when the pool
        // needs coverage; otherwise draw per-edge.
        let coverage_first: Vec<String> = match &relation.object_type {
            ObjectType::Entity { pool } if !subject_pools.contains(pool.as_str()) => {
                let mut names = rosters[pool].clone();
                names.shuffle(&mut rng);
                names
            }
            _ => Vec::new(),
        };

        for (i, subject) in subjects.into_iter().enumerate() {
            let key = (subject.clone(), relation.id.clone());
            let taken = edges.entry(key.clone()).or_default();
            let object = match &relation.object_type {
                ObjectType::Entity { pool } => {
                    let roster = &rosters[pool];
                    let mut pick = if i < coverage_first.len() {
                        coverage_first[i].clone()
                    } else {
                        roster[rng.random_range(0..roster.len())].clone()
                    };
                    // Non-functional relations may revisit a subject; keep
                    // its edges distinct by scanning forward from the draw.
                    if taken.contains(&pick) {
                        let start = roster.iter().position(|n| *n == pick).unwrap_or(0);
                        for step in 1..roster.len() {
                            let cand = &roster[(start + step) % roster.len()];
                            if !taken.contains(cand) {
                                pick = cand.clone();
                                break;
                            }
                        }
                    }
                    Value::Entity(pick)
                }
                ObjectType::Number { min, max } => {
                    Value::Number(rng.random_range(*min..=*max).into())
                }
                ObjectType::Date { min_year, max_year } => {
                    let y = rng.random_range(*min_year..=*max_year);
                    let m = rng.random_range(1..=12u32);
                    let d = rng.random_range(1..=28u32);
                    Value::Date(format!("{y:04}-{m:02}-{d:02}"))
                }
            };
            taken.insert(object.render());
            triples.insert(Triple::new(subject, relation.id.clone(), object)?);
        }
    }

    let entities = rosters
        .into_iter()
        .flat_map(|(ptype, names)| names.into_iter().map(move |n| (n, ptype.clone())))
        .collect();
    let kg = KnowledgeGraph { entities, triples };
    kg.validate()?;
    Ok(kg)
}

/// Reconstruct the grounding KG embedded in a database (union of all fact
/// grounding triples). Pool types are unknown after the round trip.
pub fn kg_from_db(db: &Database) -> KnowledgeGraph {
    let mut kg = KnowledgeGraph::new();
    for fact in db.facts() {
        for t in &fact.grounding {
            kg.entities.entry(t.subject.clone()).or_insert_with(|| "entity".into());
            if let Value::Entity(name) = &t.object {
                kg.entities.entry(name.clone()).or_insert_with(|| "entity".into());
            }
            kg.triples.insert(t.clone());
        }
    }
    kg
}

/// Parse a tab-separated triples file: `subject TAB relation TAB object TAB
/// otype` per line. Duplicates collapse (set semantics).
pub fn ingest_triples(path: impl AsRef<Path>) -> Result<KnowledgeGraph, DatagenError> {
    let file = std::fs::File::open(path)?;
    let mut kg = KnowledgeGraph::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        let [s, r, o, otype] = parts.as_slice() else {
            return Err(DatagenError::TripleFile {
                line: lineno + 1,
                reason: format!("expected 4 tab-separated fields, got {}", parts.len()),
            });
        };
        let object = Value::from_parts(otype, o).map_err(|e| DatagenError::TripleFile {
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        kg.entities.entry(s.to_string()).or_insert_with(|| "entity".into());
        if let Value::Entity(name) = &object {
            kg.entities.entry(name.clone()).or_insert_with(|| "entity".into());
        }
        let triple = Triple::new(*s, *r, object).map_err(|e| DatagenError::TripleFile {
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        kg.triples.insert(triple);
    }
    Ok(kg)
}

/// Inverse of [`ingest_triples`]: sorted, tab-separated, one triple per line.
pub fn export_triples(kg: &KnowledgeGraph, path: impl AsRef<Path>) -> Result<(), DatagenError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for t in &kg.triples {
        writeln!(out, "{}\t{}\t{}\t{}", t.subject, t.relation, t.object.render(), t.object.otype())?;
    }
    out.flush()?;
    Ok(())
}
