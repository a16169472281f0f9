//! Oracle SPJ: interprets the query's machine-readable semantics over the
//! grounding triples carried by the support set's facts.
//!
//! The oracle is deliberately conservative: a support set must determine
//! the queried pattern *uniquely* to produce a span or key-value payload.
//! Zero matches, or more than one (ambiguity, e.g. after merging with facts
//! that also match the pattern), yield Null — never a wrong span. Facts
//! disjoint from the pattern are ignored, which gives distractor
//! robustness.

use std::collections::BTreeSet;

use factdb_core::{
    Database, ExtremalKind, Query, QuerySemantics, QueryType, Slot, SupportSet, Triple, Value,
};

use crate::{Derivation, ExtremalOp, SpanOp, SpjError, SpjOperator};

fn span_op_for(qtype: QueryType) -> Option<SpanOp> {
    match qtype {
        QueryType::Set | QueryType::JoinSet => Some(SpanOp::Set),
        QueryType::Count | QueryType::JoinCount => Some(SpanOp::Count),
        _ => None,
    }
}

fn extremal_op_for(kind: ExtremalKind) -> ExtremalOp {
    match kind {
        ExtremalKind::Min => ExtremalOp::Min,
        ExtremalKind::Max => ExtremalOp::Max,
        ExtremalKind::ArgMin => ExtremalOp::ArgMin,
        ExtremalKind::ArgMax => ExtremalOp::ArgMax,
    }
}

/// Run the grounded SPJ oracle for one (query, support set) pair.
pub fn oracle_spj(
    query: &Query,
    support: &SupportSet,
    db: &Database,
) -> Result<Derivation, SpjError> {
    let semantics = query
        .semantics
        .as_ref()
        .ok_or_else(|| SpjError::MissingSemantics(query.id.clone()))?;

    let mut triples: Vec<&Triple> = Vec::new();
    for id in support.ids() {
        let fact = db.get(id).ok_or(SpjError::UnknownFact(id))?;
        triples.extend(fact.grounding.iter());
    }

    let mismatch = || SpjError::SemanticsMismatch {
        query: query.id.clone(),
        qtype: query.qtype.to_string(),
    };

    match semantics {
        QuerySemantics::SetLike { relation, bound_subject, bound_object, answer_slot } => {
            let op = span_op_for(query.qtype).ok_or_else(mismatch)?;
            let answers: BTreeSet<String> = triples
                .iter()
                .filter(|t| {
                    t.relation == *relation
                        && bound_subject.as_ref().is_none_or(|s| t.subject == *s)
                        && bound_object.as_ref().is_none_or(|o| t.object == *o)
                })
                .map(|t| match answer_slot {
                    Slot::Subject => t.subject.clone(),
                    Slot::Object => t.object.render(),
                })
                .collect();
            match answers.len() {
                1 => Derivation::span(op, answers.into_iter().next().unwrap()),
                _ => Ok(Derivation::Null),
            }
        }
        QuerySemantics::BoolCheck { relation, subject, object } => {
            if !matches!(query.qtype, QueryType::Bool) {
                return Err(mismatch());
            }
            let subject_edges: Vec<&&Triple> = triples
                .iter()
                .filter(|t| t.relation == *relation && t.subject == *subject)
                .collect();
            if subject_edges.iter().any(|t| t.object == *object) {
                Ok(Derivation::Bool(true))
            } else if !subject_edges.is_empty() {
                // The set witnesses this subject's actual value(s) for the
                // relation and none is the queried object.
                Ok(Derivation::Bool(false))
            } else {
                Ok(Derivation::Null)
            }
        }
        QuerySemantics::Extremal { relation, extremum } => {
            if !matches!(query.qtype, QueryType::MinMax) {
                return Err(mismatch());
            }
            let candidates: BTreeSet<(String, &Value)> = triples
                .iter()
                .filter(|t| {
                    t.relation == *relation
                        && matches!(t.object, Value::Number(_) | Value::Date(_))
                })
                .map(|t| (t.subject.clone(), &t.object))
                .collect();
            match candidates.len() {
                1 => {
                    let (key, value) = candidates.into_iter().next().unwrap();
                    Derivation::key_value(extremal_op_for(*extremum), key, value.clone())
                }
                _ => Ok(Derivation::Null),
            }
        }
        QuerySemantics::JoinSetLike { hop1, hop2, terminal } => {
            let op = span_op_for(query.qtype).ok_or_else(mismatch)?;
            let bridges: BTreeSet<&str> = triples
                .iter()
                .filter(|t| t.relation == *hop2 && t.object == *terminal)
                .map(|t| t.subject.as_str())
                .collect();
            let xs: BTreeSet<String> = triples
                .iter()
                .filter(|t| t.relation == *hop1 && bridges.contains(t.object.render().as_str()))
                .map(|t| t.subject.clone())
                .collect();
            match xs.len() {
                1 => Derivation::span(op, xs.into_iter().next().unwrap()),
                _ => Ok(Derivation::Null),
            }
        }
        QuerySemantics::JoinBoolCheck { hop1, hop2, subject, terminal } => {
            if !matches!(query.qtype, QueryType::JoinBool) {
                return Err(mismatch());
            }
            let hop1_objects: BTreeSet<String> = triples
                .iter()
                .filter(|t| t.relation == *hop1 && t.subject == *subject)
                .map(|t| t.object.render())
                .collect();
            if hop1_objects.is_empty() {
                return Ok(Derivation::Null);
            }
            let reaches_terminal = |y: &str| {
                triples
                    .iter()
                    .any(|t| t.relation == *hop2 && t.subject == y && t.object == *terminal)
            };
            if hop1_objects.iter().any(|y| reaches_terminal(y)) {
                return Ok(Derivation::Bool(true));
            }
            // FALSE only when the set witnesses a hop-2 value for every
            // hop-1 object; otherwise the second hop is merely missing.
            let all_covered = hop1_objects.iter().all(|y| {
                triples.iter().any(|t| t.relation == *hop2 && t.subject == *y)
            });
            if all_covered {
                Ok(Derivation::Bool(false))
            } else {
                Ok(Derivation::Null)
            }
        }
    }
}

/// Zero-size [`SpjOperator`] wrapper around [`oracle_spj`].
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleSpj;

impl SpjOperator for OracleSpj {
    fn derive(
        &self,
        query: &Query,
        support: &SupportSet,
        db: &Database,
    ) -> Result<Derivation, SpjError> {
        oracle_spj(query, support, db)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use factdb_core::{Fact, FactId};

    fn entity(name: &str) -> Value {
        Value::entity(name).unwrap()
    }

    fn fact(id: u32, text: &str, triples: Vec<(&str, &str, Value)>) -> Fact {
        let grounding = triples
            .into_iter()
            .map(|(s, r, o)| Triple::new(s, r, o).unwrap())
            .collect();
        Fact::new(FactId(id), text, grounding).unwrap()
    }

    /// Small grounded database reused across the oracle tests.
    fn db() -> Database {
        Database::new(vec![
            fact(
                0,
                "Mario Sagario was born in Montevideo.",
                vec![("Mario Sagario", "bornIn", entity("Montevideo"))],
            ),
            fact(
                1,
                "Ana Blanco was born in Madrid.",
                vec![("Ana Blanco", "bornIn", entity("Madrid"))],
            ),
            fact(
                2,
                "Mario Sagario was born on 1981-09-26.",
                vec![("Mario Sagario", "bornOn", Value::date("1981-09-26").unwrap())],
            ),
            fact(
                3,
                "The Tate Modern receives 5839197 visitors per year.",
                vec![("Tate Modern", "visitorsPerYear", Value::number("5839197").unwrap())],
            ),
            fact(
                4,
                "Thomas Allofs plays for RC Strasbourg.",
                vec![("Thomas Allofs", "playsFor", entity("RC Strasbourg"))],
            ),
            fact(
                5,
                "RC Strasbourg competes in Ligue 1.",
                vec![("RC Strasbourg", "inLeague", entity("Ligue 1"))],
            ),
            fact(
                6,
                "The musée en herbe receives 70000 visitors per year.",
                vec![("musée en herbe", "visitorsPerYear", Value::number("70000").unwrap())],
            ),
        ])
        .unwrap()
    }

    fn set_query(id: &str) -> Query {
        Query {
            id: id.into(),
            text: "Who was born in Montevideo?".into(),
            qtype: QueryType::Set,
            template_id: "bornIn/set/0".into(),
            gold_answer: None,
            gold_support_sets: Default::default(),
            semantics: Some(QuerySemantics::SetLike {
                relation: "bornIn".into(),
                bound_subject: None,
                bound_object: Some(entity("Montevideo")),
                answer_slot: Slot::Subject,
            }),
        }
    }

    fn sset(ids: &[u32]) -> SupportSet {
        ids.iter().map(|&i| FactId(i)).collect()
    }

    #[test]
    fn set_query_extracts_subject_span() {
        // "Who was born in Montevideo?" over the Mario Sagario fact.
        let d = oracle_spj(&set_query("q"), &sset(&[0]), &db()).unwrap();
        assert_eq!(d, Derivation::Span { op: SpanOp::Set, text: "Mario Sagario".into() });
    }

    #[test]
    fn irrelevant_fact_yields_null() {
        // Visitor query against a birth-date fact.
        let q = Query {
            id: "q".into(),
            text: "What is the largest yearly attendance?".into(),
            qtype: QueryType::MinMax,
            template_id: "visitorsPerYear/minmax/0".into(),
            gold_answer: None,
            gold_support_sets: Default::default(),
            semantics: Some(QuerySemantics::Extremal {
                relation: "visitorsPerYear".into(),
                extremum: ExtremalKind::Max,
            }),
        };
        assert_eq!(oracle_spj(&q, &sset(&[2]), &db()).unwrap(), Derivation::Null);
        // And the matching fact produces the key-value pair.
        let d = oracle_spj(&q, &sset(&[3]), &db()).unwrap();
        assert_eq!(
            d,
            Derivation::key_value(ExtremalOp::Max, "Tate Modern", Value::number("5839197").unwrap())
                .unwrap()
        );
    }

    #[test]
    fn join_with_single_hop_is_null() {
        let q = Query {
            id: "q".into(),
            text: "Who plays for a team in Ligue 1?".into(),
            qtype: QueryType::JoinSet,
            template_id: "J1/joinset/0".into(),
            gold_answer: None,
            gold_support_sets: Default::default(),
            semantics: Some(QuerySemantics::JoinSetLike {
                hop1: "playsFor".into(),
                hop2: "inLeague".into(),
                terminal: entity("Ligue 1"),
            }),
        };
        let d = db();
        assert_eq!(oracle_spj(&q, &sset(&[4]), &d).unwrap(), Derivation::Null);
        assert_eq!(oracle_spj(&q, &sset(&[5]), &d).unwrap(), Derivation::Null);
        assert_eq!(
            oracle_spj(&q, &sset(&[4, 5]), &d).unwrap(),
            Derivation::Span { op: SpanOp::Set, text: "Thomas Allofs".into() }
        );
    }

    #[test]
    fn distractors_never_flip_a_decodable_answer() {
        let q = set_query("q");
        let d = db();
        let clean = oracle_spj(&q, &sset(&[0]), &d).unwrap();
        // Facts 2..7 are disjoint from the bornIn/Montevideo pattern.
        for distractors in [&[2u32][..], &[3, 4], &[2, 3, 4, 5, 6]] {
            let mut ids = vec![0u32];
            ids.extend_from_slice(distractors);
            assert_eq!(oracle_spj(&q, &sset(&ids), &d).unwrap(), clean);
        }
    }

    #[test]
    fn ambiguity_yields_null_not_wrong_span() {
        // Two distinct bornIn matches with no bound object.
        let q = Query {
            semantics: Some(QuerySemantics::SetLike {
                relation: "bornIn".into(),
                bound_subject: None,
                bound_object: None,
                answer_slot: Slot::Subject,
            }),
            ..set_query("q")
        };
        assert_eq!(oracle_spj(&q, &sset(&[0, 1]), &db()).unwrap(), Derivation::Null);
    }

    #[test]
    fn bool_check_true_false_null() {
        let mut q = set_query("q");
        q.qtype = QueryType::Bool;
        q.semantics = Some(QuerySemantics::BoolCheck {
            relation: "bornIn".into(),
            subject: "Mario Sagario".into(),
            object: entity("Montevideo"),
        });
        let d = db();
        assert_eq!(oracle_spj(&q, &sset(&[0]), &d).unwrap(), Derivation::Bool(true));
        // Witnessed different object → FALSE.
        q.semantics = Some(QuerySemantics::BoolCheck {
            relation: "bornIn".into(),
            subject: "Mario Sagario".into(),
            object: entity("Madrid"),
        });
        assert_eq!(oracle_spj(&q, &sset(&[0]), &d).unwrap(), Derivation::Bool(false));
        // No witness for the subject → Null.
        assert_eq!(oracle_spj(&q, &sset(&[1, 2]), &d).unwrap(), Derivation::Null);
    }

    #[test]
    fn join_bool_false_needs_full_witness() {
        let mut q = set_query("q");
        q.qtype = QueryType::JoinBool;
        q.semantics = Some(QuerySemantics::JoinBoolCheck {
            hop1: "playsFor".into(),
            hop2: "inLeague".into(),
            subject: "Thomas Allofs".into(),
            terminal: entity("Serie A"),
        });
        let d = db();
        // Hop-1 alone: second hop missing, not FALSE.
        assert_eq!(oracle_spj(&q, &sset(&[4]), &d).unwrap(), Derivation::Null);
        // Both hops witnessed, terminal differs → FALSE.
        assert_eq!(oracle_spj(&q, &sset(&[4, 5]), &d).unwrap(), Derivation::Bool(false));
        // Matching terminal → TRUE.
        q.semantics = Some(QuerySemantics::JoinBoolCheck {
            hop1: "playsFor".into(),
            hop2: "inLeague".into(),
            subject: "Thomas Allofs".into(),
            terminal: entity("Ligue 1"),
        });
        assert_eq!(oracle_spj(&q, &sset(&[4, 5]), &d).unwrap(), Derivation::Bool(true));
    }

    #[test]
    fn missing_semantics_is_an_error() {
        let mut q = set_query("q");
        q.semantics = None;
        assert!(matches!(
            oracle_spj(&q, &sset(&[0]), &db()),
            Err(SpjError::MissingSemantics(_))
        ));
    }

    #[test]
    fn unknown_fact_is_an_error() {
        assert!(matches!(
            oracle_spj(&set_query("q"), &sset(&[99]), &db()),
            Err(SpjError::UnknownFact(FactId(99)))
        ));
    }
}
