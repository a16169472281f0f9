//! Query instantiation (enumerate candidate patterns over a KG, select a
//! balanced sample, render natural-language text) and the inverse: matching
//! ad-hoc query text back to machine-readable semantics.

use std::collections::{BTreeMap, BTreeSet};

use factdb_core::{
    Database, Query, QuerySemantics, QueryType, Slot, Value,
};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::DatagenError;
use crate::kg::KnowledgeGraph;
use crate::pack::{fill_template, TemplatePack};
use crate::reference::{execute_reference, gold_support_sets_indexed, TripleIndex};
use crate::rng::rng_from;

/// Largest gold support set a generated query may require; mirrors the
/// support-set generator's cap on set size.
pub const MAX_GOLD_SET_FACTS: usize = 3;

/// A fully specified query pattern, before text rendering.
struct Candidate {
    qtype: QueryType,
    semantics: QuerySemantics,
    /// Relation or join id owning the templates.
    source: String,
    /// For minmax: index of the template that carries this extremum.
    fixed_template: Option<usize>,
}

fn distinct_objects<'a>(kg: &'a KnowledgeGraph, relation: &str) -> Vec<&'a Value> {
    let mut seen = BTreeSet::new();
    kg.triples
        .iter()
        .filter(|t| t.relation == relation)
        .map(|t| &t.object)
        .filter(|o| seen.insert(o.render()))
        .collect()
}

fn distinct_subjects<'a>(kg: &'a KnowledgeGraph, relation: &str) -> Vec<&'a str> {
    let mut seen = BTreeSet::new();
    kg.triples
        .iter()
        .filter(|t| t.relation == relation)
        .map(|t| t.subject.as_str())
        .filter(|s| seen.insert(s.to_string()))
        .collect()
}

/// Deterministic enumeration of every instantiable pattern, bucketed by
/// query type. Follows pack order, then sorted KG order.
fn enumerate_candidates(
    kg: &KnowledgeGraph,
    pack: &TemplatePack,
) -> BTreeMap<QueryType, Vec<Candidate>> {
    let mut buckets: BTreeMap<QueryType, Vec<Candidate>> =
        QueryType::ALL.iter().map(|q| (*q, Vec::new())).collect();

    for r in &pack.relations {
        let objects = distinct_objects(kg, &r.id);
        let subjects = distinct_subjects(kg, &r.id);
        let has = |templates: &[String], ph: &str| templates.iter().any(|t| t.contains(ph));
        let entity_object = matches!(r.object_type, crate::pack::ObjectType::Entity { .. });

        // Set / Count: one candidate per bound value on whichever side the
        // relation's templates can express.
        for (qtype, templates) in
            [(QueryType::Set, &r.query_templates.set), (QueryType::Count, &r.query_templates.count)]
        {
            if has(templates, "$O") && entity_object {
                for object in &objects {
                    buckets.get_mut(&qtype).unwrap().push(Candidate {
                        qtype,
                        semantics: QuerySemantics::SetLike {
                            relation: r.id.clone(),
                            bound_subject: None,
                            bound_object: Some((*object).clone()),
                            answer_slot: Slot::Subject,
                        },
                        source: r.id.clone(),
                        fixed_template: None,
                    });
                }
            }
            if has(templates, "$S") {
                for subject in &subjects {
                    buckets.get_mut(&qtype).unwrap().push(Candidate {
                        qtype,
                        semantics: QuerySemantics::SetLike {
                            relation: r.id.clone(),
                            bound_subject: Some(subject.to_string()),
                            bound_object: None,
                            answer_slot: Slot::Object,
                        },
                        source: r.id.clone(),
                        fixed_template: None,
                    });
                }
            }
        }

        // Bool: TRUE per triple; witnessed FALSE per subject, using the
        // first in-domain object the subject does not have.
        if !r.query_templates.bool_.is_empty() {
            let bucket = buckets.get_mut(&QueryType::Bool).unwrap();
            for t in kg.triples.iter().filter(|t| t.relation == r.id) {
                bucket.push(Candidate {
                    qtype: QueryType::Bool,
                    semantics: QuerySemantics::BoolCheck {
                        relation: r.id.clone(),
                        subject: t.subject.clone(),
                        object: t.object.clone(),
                    },
                    source: r.id.clone(),
                    fixed_template: None,
                });
            }
            for subject in &subjects {
                let own: BTreeSet<String> = kg
                    .matches(&r.id, Some(subject), None)
                    .iter()
                    .map(|t| t.object.render())
                    .collect();
                if let Some(foreign) =
                    objects.iter().find(|o| !own.contains(&o.render()))
                {
                    bucket.push(Candidate {
                        qtype: QueryType::Bool,
                        semantics: QuerySemantics::BoolCheck {
                            relation: r.id.clone(),
                            subject: subject.to_string(),
                            object: (*foreign).clone(),
                        },
                        source: r.id.clone(),
                        fixed_template: None,
                    });
                }
            }
        }

        // MinMax: one candidate per extremal template.
        if !objects.is_empty() {
            for (i, template) in r.query_templates.minmax.iter().enumerate() {
                buckets.get_mut(&QueryType::MinMax).unwrap().push(Candidate {
                    qtype: QueryType::MinMax,
                    semantics: QuerySemantics::Extremal {
                        relation: r.id.clone(),
                        extremum: template.extremum,
                    },
                    source: r.id.clone(),
                    fixed_template: Some(i),
                });
            }
        }
    }

    for j in &pack.joins {
        // Terminals with at least one full two-hop witness.
        let hop1_objects: BTreeSet<String> = kg
            .triples
            .iter()
            .filter(|t| t.relation == j.hop1)
            .map(|t| t.object.render())
            .collect();
        let witnessed_terminals: Vec<&Value> = distinct_objects(kg, &j.hop2)
            .into_iter()
            .filter(|z| {
                kg.matches(&j.hop2, None, Some(z))
                    .iter()
                    .any(|b| hop1_objects.contains(&b.subject))
            })
            .collect();

        for (qtype, templates) in [
            (QueryType::JoinSet, &j.query_templates.joinset),
            (QueryType::JoinCount, &j.query_templates.joincount),
        ] {
            if templates.is_empty() {
                continue;
            }
            for z in &witnessed_terminals {
                buckets.get_mut(&qtype).unwrap().push(Candidate {
                    qtype,
                    semantics: QuerySemantics::JoinSetLike {
                        hop1: j.hop1.clone(),
                        hop2: j.hop2.clone(),
                        terminal: (*z).clone(),
                    },
                    source: j.id.clone(),
                    fixed_template: None,
                });
            }
        }

        if !j.query_templates.joinbool.is_empty() {
            let bucket = buckets.get_mut(&QueryType::JoinBool).unwrap();
            // TRUE: one candidate per (x, terminal) witness pair.
            let mut seen_true: BTreeSet<(String, String)> = BTreeSet::new();
            for h1 in kg.triples.iter().filter(|t| t.relation == j.hop1) {
                for h2 in kg.matches(&j.hop2, Some(&h1.object.render()), None) {
                    if seen_true.insert((h1.subject.clone(), h2.object.render())) {
                        bucket.push(Candidate {
                            qtype: QueryType::JoinBool,
                            semantics: QuerySemantics::JoinBoolCheck {
                                hop1: j.hop1.clone(),
                                hop2: j.hop2.clone(),
                                subject: h1.subject.clone(),
                                terminal: h2.object.clone(),
                            },
                            source: j.id.clone(),
                            fixed_template: None,
                        });
                    }
                }
            }
            // FALSE: subjects with exactly one hop-1 edge whose bridge has a
            // hop-2 value, asked against a terminal they do not reach.
            let hop2_objects = distinct_objects(kg, &j.hop2);
            for x in distinct_subjects(kg, &j.hop1) {
                let edges = kg.matches(&j.hop1, Some(x), None);
                let [only] = edges.as_slice() else { continue };
                let reached: BTreeSet<String> = kg
                    .matches(&j.hop2, Some(&only.object.render()), None)
                    .iter()
                    .map(|t| t.object.render())
                    .collect();
                if reached.is_empty() {
                    continue;
                }
                if let Some(z) = hop2_objects.iter().find(|z| !reached.contains(&z.render())) {
                    bucket.push(Candidate {
                        qtype: QueryType::JoinBool,
                        semantics: QuerySemantics::JoinBoolCheck {
                            hop1: j.hop1.clone(),
                            hop2: j.hop2.clone(),
                            subject: x.to_string(),
                            terminal: (*z).clone(),
                        },
                        source: j.id.clone(),
                        fixed_template: None,
                    });
                }
            }
        }
    }
    buckets
}

/// Render a candidate's text with a template drawn from the compatible
/// subset; returns (text, template_id).
fn render_candidate(
    pack: &TemplatePack,
    c: &Candidate,
    rng: &mut impl Rng,
) -> Result<(String, String), DatagenError> {
    let pick = |templates: &[String], required: &[&str], rng: &mut dyn rand::RngCore| {
        let compatible: Vec<usize> = (0..templates.len())
            .filter(|&i| required.iter().all(|ph| templates[i].contains(ph)))
            .collect();
        let idx = compatible[rng.random_range(0..compatible.len())];
        (templates[idx].clone(), idx)
    };
    let (text, idx) = match (&c.semantics, c.qtype) {
        (QuerySemantics::SetLike { bound_subject, bound_object, relation, .. }, qtype) => {
            let r = pack.relation(relation)?;
            let templates =
                if qtype == QueryType::Set { &r.query_templates.set } else { &r.query_templates.count };
            match (bound_subject, bound_object) {
                (Some(s), None) => {
                    let (t, i) = pick(templates, &["$S"], rng);
                    (fill_template(&t, &[("$S", s)]), i)
                }
                (None, Some(o)) => {
                    let (t, i) = pick(templates, &["$O"], rng);
                    (fill_template(&t, &[("$O", &o.render())]), i)
                }
                _ => {
                    return Err(DatagenError::Config(
                        "set-like candidate must bind exactly one side".into(),
                    ))
                }
            }
        }
        (QuerySemantics::BoolCheck { relation, subject, object }, _) => {
            let r = pack.relation(relation)?;
            let (t, i) = pick(&r.query_templates.bool_, &["$S", "$O"], rng);
            (fill_template(&t, &[("$S", subject), ("$O", &object.render())]), i)
        }
        (QuerySemantics::Extremal { relation, .. }, _) => {
            let r = pack.relation(relation)?;
            let minmax = &r.query_templates.minmax;
            if minmax.is_empty() {
                return Err(DatagenError::Config(format!("{relation} has no minmax templates")));
            }
            let i = c.fixed_template.unwrap_or(0);
            (minmax[i].text.clone(), i)
        }
        (QuerySemantics::JoinSetLike { terminal, .. }, qtype) => {
            let j = pack.join(&c.source)?;
            let templates = if qtype == QueryType::JoinSet {
                &j.query_templates.joinset
            } else {
                &j.query_templates.joincount
            };
            let (t, i) = pick(templates, &["$Z"], rng);
            (fill_template(&t, &[("$Z", &terminal.render())]), i)
        }
        (QuerySemantics::JoinBoolCheck { subject, terminal, .. }, _) => {
            let j = pack.join(&c.source)?;
            let (t, i) = pick(&j.query_templates.joinbool, &["$X", "$Z"], rng);
            (fill_template(&t, &[("$X", subject), ("$Z", &terminal.render())]), i)
        }
    };
    Ok((text, format!("{}/{}/{idx}", c.source, c.qtype.label())))
}

/// Instantiate up to `target` queries over one (kg, db) pair: enumerate
/// candidates, shuffle each type bucket with the seed, then round-robin
/// across types for balance. Every emitted query carries its gold answer,
/// gold support sets (all within [`MAX_GOLD_SET_FACTS`]), and semantics.
pub fn instantiate_queries(
    kg: &KnowledgeGraph,
    db: &Database,
    pack: &TemplatePack,
    target: usize,
    seed: u64,
    id_prefix: &str,
) -> Result<Vec<Query>, DatagenError> {
    let mut rng = rng_from(seed);
    let mut buckets = enumerate_candidates(kg, pack);
    for bucket in buckets.values_mut() {
        bucket.shuffle(&mut rng);
    }
    let index = TripleIndex::new(db);

    let mut queries: Vec<Query> = Vec::with_capacity(target);
    let mut cursors: BTreeMap<QueryType, usize> =
        QueryType::ALL.iter().map(|q| (*q, 0)).collect();
    'outer: loop {
        let mut progressed = false;
        for qtype in QueryType::ALL {
            if queries.len() >= target {
                break 'outer;
            }
            let bucket = &buckets[&qtype];
            let cursor = cursors.get_mut(&qtype).unwrap();
            // Advance past candidates whose gold sets are unusable.
            while *cursor < bucket.len() {
                let candidate = &bucket[*cursor];
                *cursor += 1;
                let sets =
                    gold_support_sets_indexed(kg, &index, candidate.qtype, &candidate.semantics)?;
                if sets.is_empty() || sets.iter().any(|s| s.len() > MAX_GOLD_SET_FACTS) {
                    continue;
                }
                let answer = execute_reference(kg, candidate.qtype, &candidate.semantics)?;
                let (text, template_id) = render_candidate(pack, candidate, &mut rng)?;
                queries.push(Query {
                    id: format!("{id_prefix}-q{:03}", queries.len()),
                    text,
                    qtype: candidate.qtype,
                    template_id,
                    gold_answer: Some(answer),
                    gold_support_sets: sets,
                    semantics: Some(candidate.semantics.clone()),
                });
                progressed = true;
                break;
            }
        }
        if !progressed || queries.len() >= target {
            break;
        }
    }
    Ok(queries)
}

/// Result of matching ad-hoc query text against the pack's templates.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedQuery {
    pub qtype: QueryType,
    pub semantics: QuerySemantics,
    pub template_id: String,
}

/// Split a template into literal segments and the placeholder names between
/// them. literals.len() == placeholders.len() + 1.
fn split_template(template: &str) -> (Vec<String>, Vec<String>) {
    let mut literals = Vec::new();
    let mut placeholders = Vec::new();
    let mut rest = template;
    let mut current = String::new();
    'scan: while !rest.is_empty() {
        for ph in ["$S", "$O", "$X", "$Z"] {
            if let Some(stripped) = rest.strip_prefix(ph) {
                literals.push(std::mem::take(&mut current));
                placeholders.push(ph.to_string());
                rest = stripped;
                continue 'scan;
            }
        }
        let ch = rest.chars().next().unwrap();
        current.push(ch);
        rest = &rest[ch.len_utf8()..];
    }
    literals.push(current);
    (literals, placeholders)
}

/// Match `text` against `template`, returning placeholder captures.
fn match_template(template: &str, text: &str) -> Option<BTreeMap<String, String>> {
    let (literals, placeholders) = split_template(template);
    if placeholders.is_empty() {
        return (template == text).then(BTreeMap::new);
    }
    let mut captures = BTreeMap::new();
    let mut pos = literals[0].len();
    if !text.starts_with(&literals[0]) {
        return None;
    }
    for (i, ph) in placeholders.iter().enumerate() {
        let next = &literals[i + 1];
        let capture_end = if i + 1 == placeholders.len() {
            // Final literal must terminate the text.
            if !text.ends_with(next.as_str()) || text.len() < pos + next.len() {
                return None;
            }
            text.len() - next.len()
        } else {
            pos + text[pos..].find(next.as_str())?
        };
        let capture = &text[pos..capture_end];
        if capture.is_empty() {
            return None;
        }
        captures.insert(ph.clone(), capture.to_string());
        pos = capture_end + next.len();
    }
    Some(captures)
}

/// Validate a captured object string against a relation's object kind; for
/// entity objects it must appear as an object of that relation in the KG.
fn parse_object(
    kg: &KnowledgeGraph,
    relation: &str,
    object_type: &crate::pack::ObjectType,
    raw: &str,
) -> Option<Value> {
    match object_type {
        crate::pack::ObjectType::Entity { .. } => {
            let v = Value::entity(raw).ok()?;
            kg.triples
                .iter()
                .any(|t| t.relation == relation && t.object == v)
                .then_some(v)
        }
        crate::pack::ObjectType::Number { .. } => Value::number(raw).ok(),
        crate::pack::ObjectType::Date { .. } => Value::date(raw).ok(),
    }
}

fn is_subject_of(kg: &KnowledgeGraph, relation: &str, name: &str) -> bool {
    kg.triples.iter().any(|t| t.relation == relation && t.subject == name)
}

/// Interpret ad-hoc query text by matching it against the pack's query
/// templates and validating the captures against the KG. First valid match
/// in (relation order, type order, template order) wins.
pub fn match_query(pack: &TemplatePack, kg: &KnowledgeGraph, text: &str) -> Option<MatchedQuery> {
    let text = factdb_core::collapse_whitespace(text);

    for r in &pack.relations {
        // Set / Count.
        for (qtype, templates) in
            [(QueryType::Set, &r.query_templates.set), (QueryType::Count, &r.query_templates.count)]
        {
            for (i, template) in templates.iter().enumerate() {
                let Some(caps) = match_template(template, &text) else { continue };
                let semantics = if let Some(raw) = caps.get("$O") {
                    let Some(object) = parse_object(kg, &r.id, &r.object_type, raw) else {
                        continue;
                    };
                    QuerySemantics::SetLike {
                        relation: r.id.clone(),
                        bound_subject: None,
                        bound_object: Some(object),
                        answer_slot: Slot::Subject,
                    }
                } else if let Some(raw) = caps.get("$S") {
                    if !is_subject_of(kg, &r.id, raw) {
                        continue;
                    }
                    QuerySemantics::SetLike {
                        relation: r.id.clone(),
                        bound_subject: Some(raw.clone()),
                        bound_object: None,
                        answer_slot: Slot::Object,
                    }
                } else {
                    continue;
                };
                return Some(MatchedQuery {
                    qtype,
                    semantics,
                    template_id: format!("{}/{}/{i}", r.id, qtype.label()),
                });
            }
        }
        // Bool.
        for (i, template) in r.query_templates.bool_.iter().enumerate() {
            let Some(caps) = match_template(template, &text) else { continue };
            let (Some(s), Some(o)) = (caps.get("$S"), caps.get("$O")) else { continue };
            if !is_subject_of(kg, &r.id, s) {
                continue;
            }
            let Some(object) = parse_object(kg, &r.id, &r.object_type, o) else {
                continue;
            };
            return Some(MatchedQuery {
                qtype: QueryType::Bool,
                semantics: QuerySemantics::BoolCheck {
                    relation: r.id.clone(),
                    subject: s.clone(),
                    object,
                },
                template_id: format!("{}/bool/{i}", r.id),
            });
        }
        // MinMax: exact text.
        for (i, template) in r.query_templates.minmax.iter().enumerate() {
            if template.text == text {
                return Some(MatchedQuery {
                    qtype: QueryType::MinMax,
                    semantics: QuerySemantics::Extremal {
                        relation: r.id.clone(),
                        extremum: template.extremum,
                    },
                    template_id: format!("{}/minmax/{i}", r.id),
                });
            }
        }
    }

    for j in &pack.joins {
        let hop2_object = |raw: &str| -> Option<Value> {
            let v = Value::entity(raw).ok()?;
            kg.triples
                .iter()
                .any(|t| t.relation == j.hop2 && t.object == v)
                .then_some(v)
        };
        for (qtype, templates) in [
            (QueryType::JoinSet, &j.query_templates.joinset),
            (QueryType::JoinCount, &j.query_templates.joincount),
        ] {
            for (i, template) in templates.iter().enumerate() {
                let Some(caps) = match_template(template, &text) else { continue };
                let Some(z) = caps.get("$Z").and_then(|raw| hop2_object(raw)) else { continue };
                return Some(MatchedQuery {
                    qtype,
                    semantics: QuerySemantics::JoinSetLike {
                        hop1: j.hop1.clone(),
                        hop2: j.hop2.clone(),
                        terminal: z,
                    },
                    template_id: format!("{}/{}/{i}", j.id, qtype.label()),
                });
            }
        }
        for (i, template) in j.query_templates.joinbool.iter().enumerate() {
            let Some(caps) = match_template(template, &text) else { continue };
            let (Some(x), Some(zraw)) = (caps.get("$X"), caps.get("$Z")) else { continue };
            if !is_subject_of(kg, &j.hop1, x) {
                continue;
            }
            let Some(z) = hop2_object(zraw) else { continue };
            return Some(MatchedQuery {
                qtype: QueryType::JoinBool,
                semantics: QuerySemantics::JoinBoolCheck {
                    hop1: j.hop1.clone(),
                    hop2: j.hop2.clone(),
                    subject: x.clone(),
                    terminal: z,
                },
                template_id: format!("{}/joinbool/{i}", j.id),
            });
        }
    }
    None
}
