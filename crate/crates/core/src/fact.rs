use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CoreError;
use crate::value::Value;

/// Identifier of a fact within one database. Serialized as a bare number.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FactId(pub u32);

impl std::fmt::Display for FactId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "f{}", self.0)
    }
}

/// Knowledge-graph triple (S, R, O).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: String,
    pub relation: String,
    pub object: Value,
}

impl Triple {
    pub fn new(
        subject: impl Into<String>,
        relation: impl Into<String>,
        object: Value,
    ) -> crate::Result<Triple> {
        let subject = subject.into();
        let relation = relation.into();
        if subject.trim().is_empty() || relation.trim().is_empty() {
            return Err(CoreError::Value(
                "triple subject/relation must be non-empty".into(),
            ));
        }
        object.validate()?;
        Ok(Triple { subject, relation, object })
    }
}

#[derive(Serialize, Deserialize)]
struct TripleRepr {
    s: String,
    r: String,
    o: String,
    otype: String,
}

impl Serialize for Triple {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TripleRepr {
            s: self.subject.clone(),
            r: self.relation.clone(),
            o: self.object.render(),
            otype: self.object.otype().to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Triple {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = TripleRepr::deserialize(d)?;
        let object = Value::from_parts(&r.otype, &r.o).map_err(D::Error::custom)?;
        Triple::new(r.s, r.r, object).map_err(D::Error::custom)
    }
}

/// One natural-language sentence plus the KG triples it verbalizes.
/// Composite facts carry more than one grounding triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub id: FactId,
    pub text: String,
    pub grounding: Vec<Triple>,
}

impl Fact {
    pub fn new(id: FactId, text: impl Into<String>, grounding: Vec<Triple>) -> crate::Result<Fact> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(CoreError::Fact(format!("fact {id} has empty text")));
        }
        for (i, a) in grounding.iter().enumerate() {
            for b in grounding.iter().skip(i + 1) {
                if a == b {
                    return Err(CoreError::Fact(format!(
                        "fact {id} has duplicate grounding triple {a:?}"
                    )));
                }
            }
        }
        Ok(Fact { id, text, grounding })
    }

    fn validate(&self) -> crate::Result<()> {
        Fact::new(self.id, self.text.clone(), self.grounding.clone()).map(|_| ())
    }
}

/// Unordered collection of facts. Construction sorts facts by id, so any
/// permutation of the same facts produces an identical `Database` value —
/// permutation invariance holds by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    facts: Vec<Fact>,
    by_id: HashMap<FactId, usize>,
}

impl Database {
    pub fn new(mut facts: Vec<Fact>) -> crate::Result<Database> {
        facts.sort_by_key(|f| f.id);
        let mut by_id = HashMap::with_capacity(facts.len());
        for (i, f) in facts.iter().enumerate() {
            f.validate()?;
            if by_id.insert(f.id, i).is_some() {
                return Err(CoreError::Database(format!("duplicate fact id {}", f.id)));
            }
        }
        Ok(Database { facts, by_id })
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn get(&self, id: FactId) -> Option<&Fact> {
        self.by_id.get(&id).map(|&i| &self.facts[i])
    }

    pub fn contains(&self, id: FactId) -> bool {
        self.by_id.contains_key(&id)
    }

    /// Read a database from JSON-lines (one fact object per line).
    pub fn read_jsonl(path: impl AsRef<Path>) -> crate::Result<Database> {
        let file = std::fs::File::open(path)?;
        Self::read_jsonl_from(BufReader::new(file))
    }

    pub fn read_jsonl_from(reader: impl BufRead) -> crate::Result<Database> {
        let mut facts = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fact: Fact = serde_json::from_str(&line)
                .map_err(|source| CoreError::Json { line: lineno + 1, source })?;
            facts.push(fact);
        }
        Database::new(facts)
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> crate::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for fact in &self.facts {
            serde_json::to_writer(&mut out, fact)
                .map_err(|source| CoreError::Json { line: 0, source })?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}
