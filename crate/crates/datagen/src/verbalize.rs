//! Turn a knowledge graph into a database of natural-language facts.
//! Composite facts verbalize two or three triples about the same subject
//! in one sentence chunk.

use std::collections::BTreeMap;

use factdb_core::{Database, Fact, FactId, Triple};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::DatagenError;
use crate::kg::KnowledgeGraph;
use crate::pack::{fill_template, TemplatePack};
use crate::rng::rng_from;

/// Render one triple as a sentence using one of the relation's fact
/// templates (picked by `template_idx`, modulo the template count).
fn render_triple(
    pack: &TemplatePack,
    triple: &Triple,
    template_idx: usize,
) -> Result<String, DatagenError> {
    let relation = pack.relation(&triple.relation)?;
    let templates = &relation.fact_templates;
    let template = &templates[template_idx % templates.len()];
    Ok(fill_template(
        template,
        &[("$S", triple.subject.as_str()), ("$O", &triple.object.render())],
    ))
}

/// Verbalize a KG into facts. `composite_rate` is the probability that a
/// chunk starting at a given triple absorbs further same-subject triples
/// (with pairwise distinct relations). Pure function of its arguments.
pub fn verbalize_kg(
    kg: &KnowledgeGraph,
    pack: &TemplatePack,
    composite_rate: f64,
    seed: u64,
) -> Result<Database, DatagenError> {
    let mut rng = rng_from(seed);

    // Group triples by subject (BTreeSet iteration is sorted, so grouping
    // is deterministic).
    let mut by_subject: BTreeMap<&str, Vec<&Triple>> = BTreeMap::new();
    for t in &kg.triples {
        by_subject.entry(t.subject.as_str()).or_default().push(t);
    }

    let mut chunks: Vec<Vec<&Triple>> = Vec::new();
    for (_, mut pending) in by_subject {
        pending.shuffle(&mut rng);
        while !pending.is_empty() {
            let head = pending.remove(0);
            let mut chunk = vec![head];
            if rng.random::<f64>() < composite_rate {
                let target = rng.random_range(2..=3usize);
                while chunk.len() < target {
                    // First pending triple whose relation is new to the chunk.
                    let next = pending
                        .iter()
                        .position(|t| chunk.iter().all(|c| c.relation != t.relation));
                    match next {
                        Some(i) => chunk.push(pending.remove(i)),
                        None => break,
                    }
                }
            }
            chunks.push(chunk);
        }
    }

    // Shuffle chunk order so fact ids do not mirror subject order.
    chunks.shuffle(&mut rng);

    let mut facts = Vec::with_capacity(chunks.len());
    for (id, chunk) in chunks.into_iter().enumerate() {
        let mut sentences = Vec::with_capacity(chunk.len());
        let mut grounding = Vec::with_capacity(chunk.len());
        for triple in chunk {
            let relation = pack.relation(&triple.relation)?;
            let idx = rng.random_range(0..relation.fact_templates.len());
            sentences.push(render_triple(pack, triple, idx)?);
            grounding.push(triple.clone());
        }
        facts.push(Fact::new(FactId(id as u32), sentences.join(" "), grounding)?);
    }
    Ok(Database::new(facts)?)
}
