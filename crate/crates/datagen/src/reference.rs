//! Reference execution: compute gold answers directly over the knowledge
//! graph, and enumerate the gold support sets that let the grounded SPJ
//! pipeline reproduce those answers fact-by-fact.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use factdb_core::{
    canonicalize_answer, Answer, Database, Decimal, ExtremalKind, FactId, QuerySemantics,
    QueryType, Slot, SupportSet, Triple, Value,
};

use crate::error::DatagenError;
use crate::kg::KnowledgeGraph;

/// Compare two object values the way aggregation does: numbers by numeric
/// order, dates lexicographically, anything else incomparable.
fn cmp_values(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => Some(x.cmp(y)),
        (Value::Date(x), Value::Date(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

/// Extremal candidates: the triples of `relation` with an orderable object,
/// restricted to the first-seen orderable type (sorted triple order), that
/// achieve the extremal value. Returned sorted by subject.
fn extremal_winners<'a>(
    kg: &'a KnowledgeGraph,
    relation: &str,
    extremum: ExtremalKind,
) -> Vec<&'a Triple> {
    let candidates: Vec<&Triple> = kg
        .triples
        .iter()
        .filter(|t| {
            t.relation == relation && matches!(t.object, Value::Number(_) | Value::Date(_))
        })
        .collect();
    let Some(first) = candidates.first() else { return Vec::new() };
    let comparable: Vec<&Triple> = candidates
        .iter()
        .filter(|t| cmp_values(&t.object, &first.object).is_some())
        .copied()
        .collect();
    let want = match extremum {
        ExtremalKind::Min | ExtremalKind::ArgMin => Ordering::Less,
        ExtremalKind::Max | ExtremalKind::ArgMax => Ordering::Greater,
    };
    let mut best: &Value = &comparable[0].object;
    for t in &comparable {
        if cmp_values(&t.object, best) == Some(want) {
            best = &t.object;
        }
    }
    comparable
        .into_iter()
        .filter(|t| cmp_values(&t.object, best) == Some(Ordering::Equal))
        .collect()
}

/// Join matches: all (x, y) with x --hop1--> y --hop2--> terminal.
fn join_witnesses<'a>(
    kg: &'a KnowledgeGraph,
    hop1: &str,
    hop2: &str,
    terminal: &Value,
) -> Vec<(&'a Triple, &'a Triple)> {
    let bridge_edges: Vec<&Triple> = kg.matches(hop2, None, Some(terminal));
    let bridges: BTreeMap<&str, &Triple> =
        bridge_edges.iter().map(|t| (t.subject.as_str(), *t)).collect();
    kg.triples
        .iter()
        .filter(|t| t.relation == hop1)
        .filter_map(|t| bridges.get(t.object.render().as_str()).map(|b| (t, *b)))
        .collect()
}

/// Execute a query's semantics over the whole KG; this is the gold answer.
pub fn execute_reference(
    kg: &KnowledgeGraph,
    qtype: QueryType,
    semantics: &QuerySemantics,
) -> Result<Answer, DatagenError> {
    let wrong = |want: &str| {
        DatagenError::Config(format!("semantics {want} cannot answer a {qtype} query"))
    };
    let answer = match semantics {
        QuerySemantics::SetLike { relation, bound_subject, bound_object, answer_slot } => {
            let spans: BTreeSet<String> = kg
                .matches(relation, bound_subject.as_deref(), bound_object.as_ref())
                .iter()
                .map(|t| match answer_slot {
                    Slot::Subject => t.subject.clone(),
                    Slot::Object => t.object.render(),
                })
                .collect();
            match qtype {
                QueryType::Set => Answer::StrSet(spans),
                QueryType::Count => Answer::Num(Decimal::from(spans.len())),
                _ => return Err(wrong("set_like")),
            }
        }
        QuerySemantics::BoolCheck { relation, subject, object } => {
            if qtype != QueryType::Bool {
                return Err(wrong("bool_check"));
            }
            Answer::Bool(!kg.matches(relation, Some(subject), Some(object)).is_empty())
        }
        QuerySemantics::Extremal { relation, extremum } => {
            if qtype != QueryType::MinMax {
                return Err(wrong("extremal"));
            }
            let winners = extremal_winners(kg, relation, *extremum);
            let Some(first) = winners.first() else {
                return Err(DatagenError::NoCandidates(format!(
                    "no orderable {relation} values for an extremal query"
                )));
            };
            match extremum {
                ExtremalKind::Min | ExtremalKind::Max => match &first.object {
                    Value::Number(d) => Answer::Num(d.clone()),
                    other => Answer::Str(other.render()),
                },
                // Tie-break: lexicographically smallest key; winners come
                // out sorted because kg.triples is a BTreeSet.
                ExtremalKind::ArgMin | ExtremalKind::ArgMax => {
                    Answer::Str(first.subject.clone())
                }
            }
        }
        QuerySemantics::JoinSetLike { hop1, hop2, terminal } => {
            let xs: BTreeSet<String> = join_witnesses(kg, hop1, hop2, terminal)
                .iter()
                .map(|(t, _)| t.subject.clone())
                .collect();
            match qtype {
                QueryType::JoinSet => Answer::StrSet(xs),
                QueryType::JoinCount => Answer::Num(Decimal::from(xs.len())),
                _ => return Err(wrong("join_set_like")),
            }
        }
        QuerySemantics::JoinBoolCheck { hop1, hop2, subject, terminal } => {
            if qtype != QueryType::JoinBool {
                return Err(wrong("join_bool_check"));
            }
            let hit = kg.matches(hop1, Some(subject), None).iter().any(|t| {
                !kg.matches(hop2, Some(&t.object.render()), Some(terminal)).is_empty()
            });
            Answer::Bool(hit)
        }
    };
    Ok(canonicalize_answer(&answer))
}

/// Index from grounding triple to the facts that verbalize it.
pub struct TripleIndex<'a> {
    map: BTreeMap<&'a Triple, Vec<FactId>>,
}

impl<'a> TripleIndex<'a> {
    pub fn new(db: &'a Database) -> TripleIndex<'a> {
        let mut map: BTreeMap<&Triple, Vec<FactId>> = BTreeMap::new();
        for fact in db.facts() {
            for t in &fact.grounding {
                map.entry(t).or_default().push(fact.id);
            }
        }
        TripleIndex { map }
    }

    fn facts(&self, t: &Triple) -> Result<&[FactId], DatagenError> {
        self.map
            .get(t)
            .map(Vec::as_slice)
            .ok_or_else(|| {
                DatagenError::Config(format!(
                    "triple {} -{}-> {} is not grounded in any fact",
                    t.subject,
                    t.relation,
                    t.object.render()
                ))
            })
    }
}

/// One gold set per fact verbalizing each triple in `ts`.
fn singleton_sets(
    index: &TripleIndex,
    ts: &[&Triple],
) -> Result<BTreeSet<SupportSet>, DatagenError> {
    let mut out = BTreeSet::new();
    for t in ts {
        for id in index.facts(t)? {
            out.insert(SupportSet::singleton(*id));
        }
    }
    Ok(out)
}

/// One gold set per (fact covering a, fact covering b) pair. Collapses to a
/// singleton set when one fact grounds both triples.
fn pair_sets(
    index: &TripleIndex,
    pairs: &[(&Triple, &Triple)],
) -> Result<BTreeSet<SupportSet>, DatagenError> {
    let mut out = BTreeSet::new();
    for (a, b) in pairs {
        for fa in index.facts(a)? {
            for fb in index.facts(b)? {
                let mut s = SupportSet::singleton(*fa);
                s.insert(*fb);
                out.insert(s);
            }
        }
    }
    Ok(out)
}

/// Enumerate the gold support sets for a query: for each independent way the
/// KG satisfies the queried pattern, the smallest fact set that lets the
/// grounded SPJ operator derive that match. Aggregating the oracle's
/// derivations over these sets reproduces [`execute_reference`]'s answer.
pub fn gold_support_sets(
    kg: &KnowledgeGraph,
    db: &Database,
    qtype: QueryType,
    semantics: &QuerySemantics,
) -> Result<BTreeSet<SupportSet>, DatagenError> {
    gold_support_sets_indexed(kg, &TripleIndex::new(db), qtype, semantics)
}

/// [`gold_support_sets`] with a caller-owned [`TripleIndex`], for loops that
/// enumerate many candidate queries over one database.
pub fn gold_support_sets_indexed(
    kg: &KnowledgeGraph,
    index: &TripleIndex,
    qtype: QueryType,
    semantics: &QuerySemantics,
) -> Result<BTreeSet<SupportSet>, DatagenError> {
    match semantics {
        QuerySemantics::SetLike { relation, bound_subject, bound_object, .. } => {
            let matches = kg.matches(relation, bound_subject.as_deref(), bound_object.as_ref());
            singleton_sets(index, &matches)
        }
        QuerySemantics::BoolCheck { relation, subject, object } => {
            let exact = kg.matches(relation, Some(subject), Some(object));
            if !exact.is_empty() {
                singleton_sets(index, &exact)
            } else {
                // Witnessed FALSE: any fact showing the subject's actual
                // object(s) for this relation.
                let witnesses = kg.matches(relation, Some(subject), None);
                singleton_sets(index, &witnesses)
            }
        }
        QuerySemantics::Extremal { relation, extremum } => {
            if qtype != QueryType::MinMax {
                return Err(DatagenError::Config("extremal semantics on non-minmax query".into()));
            }
            let winners = extremal_winners(kg, relation, *extremum);
            singleton_sets(index, &winners)
        }
        QuerySemantics::JoinSetLike { hop1, hop2, terminal } => {
            let pairs = join_witnesses(kg, hop1, hop2, terminal);
            pair_sets(index, &pairs)
        }
        QuerySemantics::JoinBoolCheck { hop1, hop2, subject, terminal } => {
            let hits: Vec<(&Triple, &Triple)> = join_witnesses(kg, hop1, hop2, terminal)
                .into_iter()
                .filter(|(t, _)| t.subject == *subject)
                .collect();
            if !hits.is_empty() {
                return pair_sets(index, &hits);
            }
            // FALSE: for each hop-1 edge, pair it with each of the bridge's
            // hop-2 edges (none reaches the terminal, or we'd be above).
            let mut pairs: Vec<(&Triple, &Triple)> = Vec::new();
            for h1 in kg.matches(hop1, Some(subject), None) {
                for h2 in kg.matches(hop2, Some(&h1.object.render()), None) {
                    pairs.push((h1, h2));
                }
            }
            pair_sets(index, &pairs)
        }
    }
}
