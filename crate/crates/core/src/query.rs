use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::answer::Answer;
use crate::fact::FactId;
use crate::value::Value;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum QueryType {
    Set,
    Bool,
    Count,
    MinMax,
    JoinSet,
    JoinBool,
    JoinCount,
}

impl QueryType {
    pub const ALL: [QueryType; 7] = [
        QueryType::Set,
        QueryType::Bool,
        QueryType::Count,
        QueryType::MinMax,
        QueryType::JoinSet,
        QueryType::JoinBool,
        QueryType::JoinCount,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            QueryType::Set => "set",
            QueryType::Bool => "bool",
            QueryType::Count => "count",
            QueryType::MinMax => "minmax",
            QueryType::JoinSet => "joinset",
            QueryType::JoinBool => "joinbool",
            QueryType::JoinCount => "joincount",
        }
    }
}

impl std::fmt::Display for QueryType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Which slot of the matched triples a set/count query returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Subject,
    Object,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremalKind {
    Min,
    Max,
    ArgMin,
    ArgMax,
}

/// Machine-readable meaning of a query over the grounding KG. This is what
/// reference execution and the grounded SPJ operator interpret; the NL text
/// is only a rendering of it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuerySemantics {
    /// Match (s, relation, o) triples; one side may be bound, the
    /// `answer_slot` side is returned. Backs Set and Count queries.
    SetLike {
        relation: String,
        bound_subject: Option<String>,
        bound_object: Option<Value>,
        answer_slot: Slot,
    },
    /// Does (subject, relation, object) hold?
    BoolCheck {
        relation: String,
        subject: String,
        object: Value,
    },
    /// Min/max (or arg-min/arg-max) over all (s, relation, v) values.
    Extremal { relation: String, extremum: ExtremalKind },
    /// x --hop1--> y --hop2--> terminal; returns the set of x.
    /// Backs JoinSet and JoinCount queries.
    JoinSetLike {
        hop1: String,
        hop2: String,
        terminal: Value,
    },
    /// Does subject --hop1--> y --hop2--> terminal hold for some y?
    JoinBoolCheck {
        hop1: String,
        hop2: String,
        subject: String,
        terminal: Value,
    },
}

/// Canonical (sorted) set of fact ids believed sufficient to answer a query.
#[derive(
    Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SupportSet(BTreeSet<FactId>);

impl SupportSet {
    pub fn new() -> SupportSet {
        SupportSet(BTreeSet::new())
    }

    pub fn singleton(id: FactId) -> SupportSet {
        SupportSet(BTreeSet::from([id]))
    }

    pub fn ids(&self) -> impl Iterator<Item = FactId> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, id: FactId) -> bool {
        self.0.contains(&id)
    }

    pub fn insert(&mut self, id: FactId) -> bool {
        self.0.insert(id)
    }

    pub fn with(&self, id: FactId) -> SupportSet {
        let mut s = self.clone();
        s.insert(id);
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl FromIterator<FactId> for SupportSet {
    fn from_iter<I: IntoIterator<Item = FactId>>(iter: I) -> Self {
        SupportSet(iter.into_iter().collect())
    }
}

impl std::fmt::Display for SupportSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub text: String,
    pub qtype: QueryType,
    pub template_id: String,
    /// Present for dataset queries; absent for ad-hoc CLI queries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_answer: Option<Answer>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub gold_support_sets: BTreeSet<SupportSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantics: Option<QuerySemantics>,
}

impl Query {
    /// Check the gold invariants against the paired database: support sets
    /// non-empty, referencing only known fact ids, and the answer variant
    /// agreeing with the query type.
    pub fn validate_against(&self, db: &crate::Database) -> crate::Result<()> {
        for set in &self.gold_support_sets {
            if set.is_empty() {
                return Err(crate::CoreError::Query(format!(
                    "query {}: empty gold support set",
                    self.id
                )));
            }
            for id in set.ids() {
                if !db.contains(id) {
                    return Err(crate::CoreError::Query(format!(
                        "query {}: gold support references unknown fact {id}",
                        self.id
                    )));
                }
            }
        }
        if let Some(answer) = &self.gold_answer {
            let ok = match self.qtype {
                QueryType::Bool | QueryType::JoinBool => matches!(answer, Answer::Bool(_)),
                QueryType::Count | QueryType::JoinCount => matches!(answer, Answer::Num(_)),
                QueryType::Set | QueryType::JoinSet => matches!(answer, Answer::StrSet(_)),
                QueryType::MinMax => matches!(answer, Answer::Num(_) | Answer::Str(_)),
            };
            if !ok {
                return Err(crate::CoreError::Query(format!(
                    "query {}: gold answer variant does not match qtype {}",
                    self.id, self.qtype
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_set_is_canonically_sorted() {
        let s: SupportSet = [FactId(9), FactId(1), FactId(4)].into_iter().collect();
        let ids: Vec<FactId> = s.ids().collect();
        assert_eq!(ids, vec![FactId(1), FactId(4), FactId(9)]);
        assert_eq!(s.to_string(), "{f1,f4,f9}");
    }

    #[test]
    fn support_set_serde_is_sorted_array() {
        let s: SupportSet = [FactId(5), FactId(2)].into_iter().collect();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[2,5]");
    }

    #[test]
    fn semantics_serde_round_trip() {
        let sems = vec![
            QuerySemantics::SetLike {
                relation: "employedBy".into(),
                bound_subject: None,
                bound_object: Some(Value::entity("Acme").unwrap()),
                answer_slot: Slot::Subject,
            },
            QuerySemantics::BoolCheck {
                relation: "bornIn".into(),
                subject: "Jane".into(),
                object: Value::entity("Oslo").unwrap(),
            },
            QuerySemantics::Extremal { relation: "visitorsPerYear".into(), extremum: ExtremalKind::Max },
            QuerySemantics::JoinSetLike {
                hop1: "playsFor".into(),
                hop2: "inLeague".into(),
                terminal: Value::entity("Ligue 1").unwrap(),
            },
            QuerySemantics::JoinBoolCheck {
                hop1: "playsFor".into(),
                hop2: "inLeague".into(),
                subject: "Jane".into(),
                terminal: Value::entity("Ligue 1").unwrap(),
            },
        ];
        for s in sems {
            let js = serde_json::to_string(&s).unwrap();
            let back: QuerySemantics = serde_json::from_str(&js).unwrap();
            assert_eq!(s, back);
        }
    }

    #[test]
    fn qtype_labels_round_trip() {
        for qt in QueryType::ALL {
            let js = serde_json::to_string(&qt).unwrap();
            assert_eq!(js, format!("\"{}\"", qt.label()));
            let back: QueryType = serde_json::from_str(&js).unwrap();
            assert_eq!(qt, back);
        }
    }
}
