use std::collections::{BTreeMap, BTreeSet};

use factdb_core::{Fact, Query, SupportSet};

use crate::action::{Action, ActionKind, SsgConfig};
use crate::encoder::BiEncoder;
use crate::error::SsgError;
use crate::index::{mips, IndexedDatabase};

/// Scoring hook for the expansion loop. Implementations must honour the
/// shared selection contract (τ filter, canonical ordering, k_max) — the
/// MIPS scorer does so via [`mips`], other scorers via
/// [`crate::select_actions`].
pub trait SupportScorer {
    fn propose(
        &self,
        query: &Query,
        state: &SupportSet,
        cfg: &SsgConfig,
    ) -> Result<Vec<Action>, SsgError>;
}

/// The bi-encoder scorer: encode the state, scan the precomputed fact
/// matrix.
pub struct MipsScorer<'a, E: BiEncoder + ?Sized> {
    index: &'a IndexedDatabase<'a>,
    encoder: &'a E,
}

impl<'a, E: BiEncoder + ?Sized> MipsScorer<'a, E> {
    pub fn new(index: &'a IndexedDatabase<'a>, encoder: &'a E) -> MipsScorer<'a, E> {
        MipsScorer { index, encoder }
    }
}

impl<E: BiEncoder + ?Sized> SupportScorer for MipsScorer<'_, E> {
    fn propose(
        &self,
        query: &Query,
        state: &SupportSet,
        cfg: &SsgConfig,
    ) -> Result<Vec<Action>, SsgError> {
        let mut facts: Vec<&Fact> = Vec::with_capacity(state.len());
        for id in state.ids() {
            facts.push(self.index.db().get(id).ok_or(SsgError::UnknownFact(id))?);
        }
        let state_vec = self.encoder.encode_state(query, &facts);
        mips(self.index, &state_vec, cfg)
    }
}

/// Output of one support-set generation run plus instrumentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsgRun {
    /// Closed support sets, canonically ordered.
    pub sets: BTreeSet<SupportSet>,
    /// Number of state encodings (scorer calls); bounded by
    /// `b_max * (m_max + 1)`.
    pub state_encodings: usize,
    /// Number of frontier iterations executed.
    pub iterations: usize,
}

/// Iterative support-set expansion: start from the empty set, score all
/// AddFact/STOP actions per open state, close states on STOP, grow the rest,
/// and repeat until the frontier empties.
///
/// Bounded extensions over the plain loop: partial sets larger than `m_max`
/// are discarded, duplicate partial sets are merged (never re-opened), and
/// the frontier keeps only the `b_max` states with the highest cumulative
/// score (ties broken by canonical set order).
pub fn run_ssg(
    scorer: &dyn SupportScorer,
    query: &Query,
    cfg: &SsgConfig,
) -> Result<SsgRun, SsgError> {
    cfg.validate()?;
    let mut open: Vec<(SupportSet, f64)> = vec![(SupportSet::new(), 0.0)];
    let mut seen: BTreeSet<SupportSet> = BTreeSet::new();
    seen.insert(SupportSet::new());
    let mut closed: BTreeSet<SupportSet> = BTreeSet::new();
    let mut state_encodings = 0usize;
    let mut iterations = 0usize;

    while !open.is_empty() {
        iterations += 1;
        let mut next: BTreeMap<SupportSet, f64> = BTreeMap::new();
        for (state, cumulative) in &open {
            state_encodings += 1;
            for action in scorer.propose(query, state, cfg)? {
                match action.kind {
                    ActionKind::Stop => {
                        closed.insert(state.clone());
                    }
                    ActionKind::AddFact(id) => {
                        if state.contains(id) {
                            continue;
                        }
                        let grown = state.with(id);
                        if grown.len() > cfg.m_max || seen.contains(&grown) {
                            continue;
                        }
                        let score = cumulative + action.score;
                        next.entry(grown)
                            .and_modify(|s| *s = s.max(score))
                            .or_insert(score);
                    }
                }
            }
        }
        let mut frontier: Vec<(SupportSet, f64)> = next.into_iter().collect();
        frontier.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        frontier.truncate(cfg.b_max);
        for (state, _) in &frontier {
            seen.insert(state.clone());
        }
        open = frontier;
    }
    Ok(SsgRun { sets: closed, state_encodings, iterations })
}

/// Generate the support sets for one query with a bi-encoder. The encoder
/// must be the one the index was built with.
pub fn generate_support_sets(
    index: &IndexedDatabase,
    query: &Query,
    cfg: &SsgConfig,
    enc: &dyn BiEncoder,
) -> Result<BTreeSet<SupportSet>, SsgError> {
    let scorer = MipsScorer::new(index, enc);
    Ok(run_ssg(&scorer, query, cfg)?.sets)
}

#[cfg(test)]
mod tests {
    use factdb_core::{Database, FactId, QueryType};

    use super::*;
    use crate::encoder::{lexical_encoder, tokenize};
    use crate::index::build_index;

    fn corpus(db_size: u32, n_queries: usize, seed: u64) -> (Database, Vec<Query>) {
        let config = factdb_datagen::GenConfig::default();
        let kg = factdb_datagen::generate_kg(&config, db_size, seed).unwrap();
        let db = factdb_datagen::verbalize_kg(&kg, &config.pack, 0.3, seed + 1).unwrap();
        let queries = factdb_datagen::instantiate_queries(
            &kg,
            &db,
            &config.pack,
            n_queries,
            seed + 2,
            "q",
        )
        .unwrap();
        (db, queries)
    }

    fn plain_query(text: &str) -> Query {
        Query {
            id: "q".into(),
            text: text.into(),
            qtype: QueryType::Set,
            template_id: "t".into(),
            gold_answer: None,
            gold_support_sets: Default::default(),
            semantics: None,
        }
    }

    /// Scripted scorer: a fixed map from state to actions, used to pin the
    /// loop mechanics without any encoder in play.
    struct Scripted {
        script: BTreeMap<SupportSet, Vec<Action>>,
    }

    impl SupportScorer for Scripted {
        fn propose(
            &self,
            _query: &Query,
            state: &SupportSet,
            cfg: &SsgConfig,
        ) -> Result<Vec<Action>, SsgError> {
            Ok(crate::action::select_actions(
                self.script.get(state).cloned().unwrap_or_default(),
                cfg,
            ))
        }
    }

    fn add(id: u32, score: f64) -> Action {
        Action { kind: ActionKind::AddFact(FactId(id)), score }
    }

    fn stop(score: f64) -> Action {
        Action { kind: ActionKind::Stop, score }
    }

    fn set(ids: &[u32]) -> SupportSet {
        ids.iter().map(|&i| FactId(i)).collect()
    }

    #[test]
    fn no_action_above_tau_returns_empty_immediately() {
        let scorer = Scripted { script: BTreeMap::new() };
        let run = run_ssg(&scorer, &plain_query("q"), &SsgConfig::default()).unwrap();
        assert!(run.sets.is_empty());
        assert_eq!(run.iterations, 1);
        assert_eq!(run.state_encodings, 1);
    }

    #[test]
    fn duplicate_partial_sets_are_merged_not_reexplored() {
        // Two paths reach {0,1}: ∅→{0}→{0,1} and ∅→{1}→{0,1}. The merged
        // state is expanded once, so the pair is closed exactly once with 4
        // total state encodings (∅, {0}, {1}, {0,1}).
        let script = BTreeMap::from([
            (set(&[]), vec![add(0, 0.9), add(1, 0.8)]),
            (set(&[0]), vec![add(1, 0.9)]),
            (set(&[1]), vec![add(0, 0.9)]),
            (set(&[0, 1]), vec![stop(1.0)]),
        ]);
        let run =
            run_ssg(&Scripted { script }, &plain_query("q"), &SsgConfig::default()).unwrap();
        assert_eq!(run.sets, BTreeSet::from([set(&[0, 1])]));
        assert_eq!(run.state_encodings, 4);
        assert_eq!(run.iterations, 3);
    }

    #[test]
    fn sets_larger_than_m_max_are_discarded() {
        let script = BTreeMap::from([
            (set(&[]), vec![add(0, 0.9), stop(0.5)]),
            (set(&[0]), vec![add(1, 0.9), stop(0.5)]),
            (set(&[0, 1]), vec![add(2, 0.9), stop(0.5)]),
        ]);
        let cfg = SsgConfig { m_max: 2, ..Default::default() };
        let run = run_ssg(&Scripted { script }, &plain_query("q"), &cfg).unwrap();
        // {0,1,2} is never formed; the three prefixes all closed via STOP.
        assert_eq!(run.sets, BTreeSet::from([set(&[]), set(&[0]), set(&[0, 1])]));
        assert!(run.sets.iter().all(|s| s.len() <= 2));
    }

    #[test]
    fn frontier_keeps_highest_cumulative_scores() {
        // ∅ proposes three facts; b_max=2 must keep the two best (1 and 2)
        // and drop fact 3 entirely.
        let script = BTreeMap::from([
            (set(&[]), vec![add(1, 0.9), add(2, 0.8), add(3, 0.7)]),
            (set(&[1]), vec![stop(1.0)]),
            (set(&[2]), vec![stop(1.0)]),
            (set(&[3]), vec![stop(1.0)]),
        ]);
        let cfg = SsgConfig { b_max: 2, ..Default::default() };
        let run = run_ssg(&Scripted { script }, &plain_query("q"), &cfg).unwrap();
        assert_eq!(run.sets, BTreeSet::from([set(&[1]), set(&[2])]));
    }

    #[test]
    fn lexical_runs_respect_caps_and_work_bound() {
        let cfg = SsgConfig::default();
        for (size, seed) in [(25u32, 51u64), (50, 52)] {
            let (db, queries) = corpus(size, 30, seed);
            let enc = lexical_encoder(&db);
            let index = build_index(&db, &enc).unwrap();
            let scorer = MipsScorer::new(&index, &enc);
            for query in &queries {
                let run = run_ssg(&scorer, query, &cfg).unwrap();
                assert!(run.sets.iter().all(|s| s.len() <= cfg.m_max));
                assert!(
                    run.state_encodings <= cfg.b_max * (cfg.m_max + 1),
                    "work bound violated: {} encodings",
                    run.state_encodings
                );
                assert!(run.iterations <= cfg.m_max + 1);
            }
        }
    }

    #[test]
    fn results_are_invariant_under_fact_permutation() {
        let (db, queries) = corpus(25, 10, 61);
        let mut reversed = db.facts().to_vec();
        reversed.reverse();
        let permuted = Database::new(reversed).unwrap();
        assert_eq!(db, permuted);

        let enc = lexical_encoder(&db);
        let enc2 = lexical_encoder(&permuted);
        let index = build_index(&db, &enc).unwrap();
        let index2 = build_index(&permuted, &enc2).unwrap();
        for query in &queries {
            let a = generate_support_sets(&index, query, &SsgConfig::default(), &enc).unwrap();
            let b = generate_support_sets(&index2, query, &SsgConfig::default(), &enc2).unwrap();
            assert_eq!(a, b);
        }
    }

    /// Construct bool questions about subjects that appear in exactly one
    /// fact, keeping only questions the fact fully covers (every query token
    /// with a nonzero document frequency occurs in the fact).
    fn unique_subject_cases(
        db: &Database,
        pack: &factdb_datagen::TemplatePack,
    ) -> Vec<(Query, FactId)> {
        let known = |t: &String| db.facts().iter().any(|f| tokenize(&f.text).contains(t));
        let mut cases = Vec::new();
        for fact in db.facts() {
            let Some(triple) = fact.grounding.first() else { continue };
            let subject_tokens = tokenize(&triple.subject);
            if subject_tokens.is_empty() {
                continue;
            }
            let holders = db
                .facts()
                .iter()
                .filter(|f| {
                    let toks = tokenize(&f.text);
                    subject_tokens.iter().all(|t| toks.contains(t))
                })
                .count();
            if holders != 1 {
                continue;
            }
            let fact_tokens = tokenize(&fact.text);
            let Ok(relation) = pack.relation(&triple.relation) else { continue };
            for template in &relation.query_templates.bool_ {
                let text = factdb_datagen::fill_template(
                    template,
                    &[("$S", &triple.subject), ("$O", &triple.object.render())],
                );
                let covered = tokenize(&text)
                    .iter()
                    .filter(|t| known(t))
                    .all(|t| fact_tokens.contains(t));
                if !covered {
                    continue;
                }
                let mut query = plain_query(&text);
                query.qtype = QueryType::Bool;
                cases.push((query, fact.id));
            }
        }
        cases
    }

    #[test]
    fn unique_subject_queries_rank_their_fact_first_then_stop() {
        let pack = factdb_datagen::GenConfig::default().pack;
        let mut checked = 0;
        for seed in [71u64, 72] {
            let (db, _) = corpus(25, 5, seed);
            let enc = lexical_encoder(&db);
            let index = build_index(&db, &enc).unwrap();
            let scorer = MipsScorer::new(&index, &enc);
            let cfg = SsgConfig { tau: 0.0, ..Default::default() };
            for (query, fact_id) in unique_subject_cases(&db, &pack) {
                // From the empty state the unique matching fact ranks first.
                let actions = scorer.propose(&query, &SupportSet::new(), &cfg).unwrap();
                assert_eq!(
                    actions.first().map(|a| a.kind),
                    Some(ActionKind::AddFact(fact_id)),
                    "query {:?} did not rank its fact first",
                    query.text
                );
                // Once that fact is in the partial set, STOP outranks every
                // AddFact action.
                let actions =
                    scorer.propose(&query, &SupportSet::singleton(fact_id), &cfg).unwrap();
                assert_eq!(
                    actions.first().map(|a| a.kind),
                    Some(ActionKind::Stop),
                    "query {:?} did not stop after covering",
                    query.text
                );
                checked += 1;
            }
        }
        assert!(checked >= 10, "only {checked} unique-subject cases found");
    }
}
