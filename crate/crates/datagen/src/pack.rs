//! Template pack: relations, joins, verbalization & query templates, and
//! entity name pools. Ships as a JSON data file (see `data/default_pack.json`)
//! so the vocabulary can be extended without code changes.

use std::collections::BTreeMap;

use factdb_core::ExtremalKind;
use serde::{Deserialize, Serialize};

use crate::error::DatagenError;

/// What kind of object a relation produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ObjectType {
    /// Entity drawn from the named pool.
    Entity { pool: String },
    /// Integer drawn uniformly from [min, max].
    Number { min: i64, max: i64 },
    /// Calendar date with year drawn from [min_year, max_year].
    Date { min_year: i32, max_year: i32 },
}

/// Min/max query templates carry no placeholder; they range over the whole
/// database and declare which extremum (and whether the key or the value)
/// is asked for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxTemplate {
    pub text: String,
    pub extremum: ExtremalKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryTemplates {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub set: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty", rename = "bool")]
    pub bool_: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub count: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub minmax: Vec<MinMaxTemplate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub id: String,
    pub subject_type: String,
    pub object_type: ObjectType,
    pub functional: bool,
    pub fact_templates: Vec<String>,
    pub query_templates: QueryTemplates,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JoinQueryTemplates {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub joinset: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub joinbool: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub joincount: Vec<String>,
}

/// Two relations chained through a shared entity type:
/// x --hop1--> y --hop2--> z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinSpec {
    pub id: String,
    pub hop1: String,
    pub hop2: String,
    pub query_templates: JoinQueryTemplates,
}

/// Deterministic combinatorial name pool: name(i) = prefix + joiner + suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityPool {
    pub prefixes: Vec<String>,
    pub suffixes: Vec<String>,
    #[serde(default)]
    pub joiner: String,
}

impl EntityPool {
    /// i-th name of the pool; wraps past capacity with a numeric epithet.
    pub fn name(&self, i: usize) -> String {
        let p = self.prefixes.len().max(1);
        let s = self.suffixes.len().max(1);
        let base = if self.suffixes.is_empty() {
            self.prefixes[i % p].clone()
        } else {
            format!("{}{}{}", self.prefixes[i % p], self.joiner, self.suffixes[(i / p) % s])
        };
        let round = i / (p * s);
        if round == 0 {
            base
        } else {
            format!("{base} {}", round + 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplatePack {
    pub relations: Vec<RelationSpec>,
    pub joins: Vec<JoinSpec>,
    pub entity_pools: BTreeMap<String, EntityPool>,
}

const DEFAULT_PACK_JSON: &str = include_str!("../data/default_pack.json");

fn has_placeholder(template: &str, ph: &str) -> bool {
    template.contains(ph)
}

impl TemplatePack {
    /// The built-in pack (10 relations, 4 joins).
    pub fn builtin() -> TemplatePack {
        let pack: TemplatePack =
            serde_json::from_str(DEFAULT_PACK_JSON).expect("bundled pack parses");
        pack.validate().expect("bundled pack is valid");
        pack
    }

    /// The raw JSON of the built-in pack (for `config --print-defaults`).
    pub fn builtin_json() -> &'static str {
        DEFAULT_PACK_JSON
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<TemplatePack, DatagenError> {
        let raw = std::fs::read_to_string(path)?;
        let pack: TemplatePack = serde_json::from_str(&raw)?;
        pack.validate()?;
        Ok(pack)
    }

    pub fn relation(&self, id: &str) -> Result<&RelationSpec, DatagenError> {
        self.relations
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(|| DatagenError::UnknownRelation(id.to_string()))
    }

    pub fn join(&self, id: &str) -> Result<&JoinSpec, DatagenError> {
        self.joins
            .iter()
            .find(|j| j.id == id)
            .ok_or_else(|| DatagenError::UnknownRelation(id.to_string()))
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        let fail = |msg: String| Err(DatagenError::Pack(msg));
        if self.relations.is_empty() {
            return fail("no relations".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for r in &self.relations {
            if !seen.insert(&r.id) {
                return fail(format!("duplicate relation id {:?}", r.id));
            }
            if r.fact_templates.is_empty() {
                return fail(format!("{}: no fact templates", r.id));
            }
            for t in &r.fact_templates {
                if !has_placeholder(t, "$S") || !has_placeholder(t, "$O") {
                    return fail(format!("{}: fact template {t:?} must contain $S and $O", r.id));
                }
            }
            if !self.entity_pools.contains_key(&r.subject_type) {
                return fail(format!("{}: unknown subject pool {:?}", r.id, r.subject_type));
            }
            if let ObjectType::Entity { pool } = &r.object_type {
                if !self.entity_pools.contains_key(pool) {
                    return fail(format!("{}: unknown object pool {pool:?}", r.id));
                }
            }
            let q = &r.query_templates;
            if q.set.is_empty() && q.bool_.is_empty() && q.count.is_empty() && q.minmax.is_empty()
            {
                return fail(format!("{}: no query templates", r.id));
            }
            // Set/count templates bind exactly one side; bool templates bind
            // both. MinMax templates bind nothing by design — they range
            // over the whole database.
            for t in q.set.iter().chain(q.count.iter()) {
                let s = has_placeholder(t, "$S");
                let o = has_placeholder(t, "$O");
                if s == o {
                    return fail(format!(
                        "{}: set/count template {t:?} must contain exactly one of $S/$O",
                        r.id
                    ));
                }
            }
            for t in &q.bool_ {
                if !has_placeholder(t, "$S") || !has_placeholder(t, "$O") {
                    return fail(format!("{}: bool template {t:?} must contain $S and $O", r.id));
                }
            }
            if !q.minmax.is_empty()
                && matches!(r.object_type, ObjectType::Entity { .. })
            {
                return fail(format!(
                    "{}: minmax templates require a number or date object type",
                    r.id
                ));
            }
            if !q.set.is_empty() || !q.count.is_empty() {
                if !matches!(r.object_type, ObjectType::Entity { .. }) {
                    return fail(format!(
                        "{}: set/count templates require an entity object type",
                        r.id
                    ));
                }
            }
        }
        let mut join_ids = std::collections::BTreeSet::new();
        for j in &self.joins {
            if !join_ids.insert(&j.id) {
                return fail(format!("duplicate join id {:?}", j.id));
            }
            let a = self.relation(&j.hop1)?;
            let b = self.relation(&j.hop2)?;
            // Chaining requires hop1's object type to be hop2's subject type.
            match &a.object_type {
                ObjectType::Entity { pool } if *pool == b.subject_type => {}
                _ => {
                    return fail(format!(
                        "{}: object type of {} must equal subject type of {}",
                        j.id, j.hop1, j.hop2
                    ))
                }
            }
            match &b.object_type {
                ObjectType::Entity { .. } => {}
                _ => return fail(format!("{}: hop2 {} must have an entity object", j.id, j.hop2)),
            }
            for t in j.query_templates.joinset.iter().chain(&j.query_templates.joincount) {
                if !has_placeholder(t, "$Z") || has_placeholder(t, "$X") {
                    return fail(format!("{}: joinset/joincount template {t:?} must bind $Z only", j.id));
                }
            }
            for t in &j.query_templates.joinbool {
                if !has_placeholder(t, "$X") || !has_placeholder(t, "$Z") {
                    return fail(format!("{}: joinbool template {t:?} must bind $X and $Z", j.id));
                }
            }
        }
        Ok(())
    }
}

/// Fill `$S`/`$O`/`$X`/`$Z` placeholders in a template.
pub fn fill_template(template: &str, bindings: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (ph, v) in bindings {
        out = out.replace(ph, v);
    }
    out
}
