//! Acceptance suite: nine end-to-end criteria covering oracle exactness,
//! PerfectIR, retrieval-algorithm fidelity, aggregation vs. the reference
//! executor, the golden fixture queries, grammar robustness, the metric
//! suite, invariances, and generation determinism. Each test prints one
//! `ACCEPTANCE PASS` line on success.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use factdb_aggregate::aggregate_all;
use factdb_core::{answer_equal, render_answer, Answer, Database, Fact, FactId, SupportSet};
use factdb_datagen::{
    execute_reference, kg_from_db, read_split, write_dataset, DbEntry, GenConfig, SizeSpec,
};
use factdb_engine::{
    resolve_query, run_query, run_split, run_split_opts, spawn_stub, AppConfig, PipelineConfig,
    RetrievalMode, RunOptions, SpjBehavior, SpjMode, SsgMode, StubOptions,
};
use factdb_eval::{exact_match, set_f1, ssg_precision_recall, MatchMode};
use factdb_spj::{
    parse_derivation, serialize_derivation, spj_map, Derivation, ExtremalOp, OracleSpj, SpanOp,
};
use factdb_ssg::{run_ssg, OracleScorer, SsgConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIZES: [u32; 6] = [25, 50, 100, 250, 500, 1000];

struct Corpus {
    dir: tempfile::TempDir,
}

impl Corpus {
    fn split_file(&self, size: u32, split: &str) -> PathBuf {
        self.dir.path().join(format!("size-{size}")).join(format!("{split}.jsonl"))
    }
}

/// One shared benchmark-shaped corpus: every DB size from 25 to 1000 with
/// enough queries across the three splits for the 1000-query criterion.
fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let table = [
            (25u32, 2u32, 1u32, 6u32, 8u32),
            (50, 1, 1, 5, 7),
            (100, 1, 1, 4, 13),
            (250, 1, 1, 3, 53),
            (500, 1, 1, 2, 66),
            (1000, 1, 1, 2, 70),
        ];
        let config = GenConfig {
            sizes: table
                .iter()
                .map(|&(db_size, train, valid, test, queries_per_db)| SizeSpec {
                    db_size,
                    train,
                    valid,
                    test,
                    queries_per_db,
                })
                .collect(),
            seed: 20250825,
            ..GenConfig::default()
        };
        let dir = tempfile::tempdir().expect("tempdir");
        write_dataset(&config, dir.path()).expect("corpus generation");
        Corpus { dir }
    })
}

fn all_entries(split: &str) -> Vec<DbEntry> {
    let corpus = corpus();
    SIZES
        .iter()
        .flat_map(|&size| read_split(corpus.split_file(size, split)).expect("split reads"))
        .collect()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn fixture_table() -> [(&'static str, &'static str, &'static str); 5] {
    [
        ("yale.jsonl", "How many people work for Yale Law School?", "2"),
        ("attendance.jsonl", "What is the largest yearly attendance?", "5839197"),
        (
            "wesmoore.jsonl",
            "Is North Carolina State University the employer of Wes Moore?",
            "TRUE",
        ),
        (
            "minnesota.jsonl",
            "Who studied at University of Minnesota?",
            "Clarence Larson, John B. Totushek, Melvin Maas, Ted Mann",
        ),
        ("ligue1.jsonl", "Who plays for a team in Ligue 1?", "Thomas Allofs"),
    ]
}

fn cli_query(db: &Path, question: &str) -> String {
    let output = Command::new(env!("CARGO_BIN_EXE_factdb"))
        .args(["query", "--mode", "oracle", "--db"])
        .arg(db)
        .arg(question)
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "query failed for {question:?}: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("utf-8 stdout").trim().to_string()
}

#[test]
fn c1_oracle_end_to_end_is_exact_at_every_size_and_fast() {
    let corpus = corpus();
    let mut cfg = PipelineConfig::default();
    cfg.worker_count = 1; // the timing clause is single-threaded
    let mut elapsed_1000 = 0.0f64;
    for size in SIZES {
        let file = corpus.split_file(size, "test");
        let started = Instant::now();
        let report = run_split(&file, &cfg).expect("oracle split run");
        let secs = started.elapsed().as_secs_f64();
        assert!(report.n_queries > 0, "size {size} has no queries");
        assert_eq!(report.overall_accuracy, 100.0, "size {size} accuracy (tolerance 0)");
        assert_eq!(report.parse_failure_rate, 0.0, "size {size} parse-failure rate");
        if size == 1000 {
            elapsed_1000 = secs;
            assert!(secs < 60.0, "1000-fact test split took {secs:.1}s (limit 60s)");
        }
    }
    println!(
        "ACCEPTANCE PASS [1/9] oracle end-to-end: accuracy = 100.0 at sizes {SIZES:?}; \
         1000-fact test split in {elapsed_1000:.2}s single-threaded (< 60s)"
    );
}

#[test]
fn c2_perfectir_reproduces_every_gold_answer() {
    let mut cfg = PipelineConfig::default();
    cfg.retrieval_mode = RetrievalMode::PerfectIr;
    let mut checked = 0usize;
    for split in ["train", "valid", "test"] {
        for entry in all_entries(split) {
            for query in &entry.queries {
                let (answer, _) = run_query(&entry.db, query, &cfg).expect("perfectir run");
                let gold = query.gold_answer.as_ref().expect("dataset queries carry gold");
                assert!(
                    answer_equal(&answer, gold),
                    "query {} ({}): predicted {:?}, gold {:?}",
                    query.id,
                    query.text,
                    answer,
                    gold
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 900, "only {checked} queries checked");
    println!(
        "ACCEPTANCE PASS [2/9] PerfectIR: gold support sets -> oracle SPJ -> aggregate \
         reproduced the gold answer on all {checked} queries"
    );
}

#[test]
fn c3_oracle_ssg_returns_exactly_the_gold_sets_within_the_work_bound() {
    let corpus = corpus();
    let cfg = SsgConfig::oracle();
    let bound = cfg.b_max * (cfg.m_max + 1);
    let mut checked = 0usize;
    for size in [25u32, 1000] {
        for entry in read_split(corpus.split_file(size, "test")).unwrap() {
            let scorer = OracleScorer::new(&entry.db, &entry.queries).expect("oracle scorer");
            for query in &entry.queries {
                let run = run_ssg(&scorer, query, &cfg).expect("ssg run");
                assert_eq!(
                    run.sets, query.gold_support_sets,
                    "query {} ({}) support sets diverge",
                    query.id, query.text
                );
                assert!(
                    run.state_encodings <= bound,
                    "query {}: {} encodings > bound {bound}",
                    query.id,
                    run.state_encodings
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 150, "only {checked} queries checked");
    println!(
        "ACCEPTANCE PASS [3/9] Algorithm fidelity: oracle SSG returned exactly the gold \
         set-of-sets for 100% of {checked} queries at sizes 25 and 1000; \
         state-encoder invocations <= b_max*(m_max+1) = {bound}"
    );
}

#[test]
fn c4_aggregation_matches_the_reference_executor_on_1000_queries() {
    let mut checked = 0usize;
    'outer: for split in ["test", "valid", "train"] {
        for entry in all_entries(split) {
            let kg = kg_from_db(&entry.db);
            for query in &entry.queries {
                let sets: Vec<SupportSet> = query.gold_support_sets.iter().cloned().collect();
                let output = spj_map(query, &sets, &OracleSpj, &entry.db);
                assert_eq!(output.errors, 0, "oracle SPJ errored on {}", query.id);
                let derivations: Vec<Derivation> =
                    output.pairs.into_iter().map(|(_, d)| d).collect();
                let aggregated = aggregate_all(&derivations, 0).expect("aggregate").answer;
                let reference = execute_reference(
                    &kg,
                    query.qtype,
                    query.semantics.as_ref().expect("dataset queries carry semantics"),
                )
                .expect("reference executor");
                assert!(
                    answer_equal(&aggregated, &reference),
                    "query {}: aggregate {:?} vs reference {:?}",
                    query.id,
                    aggregated,
                    reference
                );
                checked += 1;
                if checked == 1000 {
                    break 'outer;
                }
            }
        }
    }
    assert_eq!(checked, 1000, "corpus did not yield 1000 queries");
    println!(
        "ACCEPTANCE PASS [4/9] aggregation vs brute force: aggregate over oracle \
         derivations equals execute_reference on {checked}/1000 random generated queries"
    );
}

#[test]
fn c5_golden_fixture_queries_answer_exactly_via_the_cli() {
    for (file, question, expected) in fixture_table() {
        let got = cli_query(&fixture(file), question);
        assert_eq!(got, expected, "{file}: {question}");
    }
    // The set answer additionally scores F1 = 1.0 against the gold members.
    let gold: BTreeSet<String> = ["Clarence Larson", "John B. Totushek", "Melvin Maas", "Ted Mann"]
        .into_iter()
        .map(String::from)
        .collect();
    let got = cli_query(&fixture("minnesota.jsonl"), "Who studied at University of Minnesota?");
    let predicted: BTreeSet<String> = got.split(", ").map(String::from).collect();
    let f1 = set_f1(&Answer::StrSet(predicted), &Answer::StrSet(gold)).unwrap();
    assert_eq!(f1, 1.0);
    println!(
        "ACCEPTANCE PASS [5/9] golden fixtures via `query --mode oracle`: count -> 2, \
         max -> 5839197, bool -> TRUE, set -> four alumni (F1 = 1.0), join -> Thomas Allofs"
    );
}

fn random_word(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[char] = &[
        'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'q', 'r',
        's', 't', 'u', 'v', 'w', 'x', 'y', 'z', 'A', 'B', 'C', 'D', 'E', '0', '1', '2', '3', '4',
        '5', '6', '7', '8', '9', ' ', '.', ',', '\'', '-', '(', ')', 'é', 'ü', 'λ', '北', '\u{2019}',
    ];
    loop {
        let len = rng.random_range(1..=24);
        let word: String = (0..len).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())]).collect();
        let word = word.trim().to_string();
        if !word.is_empty() {
            return word;
        }
    }
}

fn random_derivation(rng: &mut ChaCha8Rng) -> Derivation {
    loop {
        let candidate = match rng.random_range(0..6u32) {
            0 => Ok(Derivation::Null),
            1 => Ok(Derivation::Bool(rng.random_bool(0.5))),
            2 => Derivation::span(SpanOp::Set, random_word(rng)),
            3 => Derivation::span(SpanOp::Count, random_word(rng)),
            4 => {
                let op = [ExtremalOp::Min, ExtremalOp::Max, ExtremalOp::ArgMin, ExtremalOp::ArgMax]
                    [rng.random_range(0..4)];
                let sign = if rng.random_bool(0.3) { "-" } else { "" };
                let whole: u64 = rng.random_range(0..=99_999_999);
                let lit = if rng.random_bool(0.5) {
                    format!("{sign}{whole}")
                } else {
                    format!("{sign}{whole}.{:03}", rng.random_range(0..1000u32))
                };
                factdb_core::Value::number(&lit)
                    .map_err(|e| factdb_spj::SpjError::InvalidDerivation(e.to_string()))
                    .and_then(|v| Derivation::key_value(op, random_word(rng), v))
            }
            _ => {
                let op = [ExtremalOp::Min, ExtremalOp::Max, ExtremalOp::ArgMin, ExtremalOp::ArgMax]
                    [rng.random_range(0..4)];
                let iso = format!(
                    "{:04}-{:02}-{:02}",
                    rng.random_range(1..=9999u32),
                    rng.random_range(1..=12u32),
                    rng.random_range(1..=28u32)
                );
                factdb_core::Value::date(iso)
                    .map_err(|e| factdb_spj::SpjError::InvalidDerivation(e.to_string()))
                    .and_then(|v| Derivation::key_value(op, random_word(rng), v))
            }
        };
        if let Ok(d) = candidate {
            return d;
        }
    }
}

#[test]
fn c6_grammar_round_trip_fuzz_and_remote_parse_failure_reporting() {
    // Round trip: serialize then parse 10^4 random valid derivations.
    let mut rng = ChaCha8Rng::seed_from_u64(0x6f5e_4d3c);
    for i in 0..10_000 {
        let d = random_derivation(&mut rng);
        let wire = serialize_derivation(&d);
        let back = parse_derivation(&wire)
            .unwrap_or_else(|e| panic!("round trip {i} failed on {wire:?}: {e}"));
        assert_eq!(back, d, "round trip {i} changed the derivation ({wire:?})");
    }

    // Fuzz: 10^5 adversarial strings must parse or error, never crash.
    let mut parsed = 0usize;
    let mut rejected = 0usize;
    for i in 0..100_000 {
        let input: String = if i % 2 == 0 {
            const NOISE: &[char] =
                &['S', 'E', 'T', 'M', 'A', 'X', 'N', 'U', 'L', '\t', '\n', 'x', '0', '-', '.',
                  '(', ')', ' ', 'é', '\u{0}', '\u{7f}', '北'];
            let len = rng.random_range(0..60);
            (0..len).map(|_| NOISE[rng.random_range(0..NOISE.len())]).collect()
        } else {
            // Mutate a valid serialization: truncate, splice, or duplicate.
            let mut chars: Vec<char> =
                serialize_derivation(&random_derivation(&mut rng)).chars().collect();
            match rng.random_range(0..3u32) {
                0 => {
                    let keep = rng.random_range(0..=chars.len());
                    chars.truncate(keep);
                }
                1 => {
                    let at = rng.random_range(0..=chars.len());
                    chars.insert(at, '\t');
                }
                _ => {
                    if !chars.is_empty() {
                        let at = rng.random_range(0..chars.len());
                        chars.remove(at);
                    }
                }
            }
            chars.into_iter().collect()
        };
        match parse_derivation(&input) {
            Ok(_) => parsed += 1,
            Err(_) => rejected += 1,
        }
    }
    assert_eq!(parsed + rejected, 100_000);
    assert!(rejected > 0, "fuzz corpus never produced a malformed string");

    // Malformed remote output: every /spj reply is garbage; all derivations
    // degrade to Null and the parse-failure rate reports it.
    let corpus = corpus();
    let mut cfg = PipelineConfig::default();
    cfg.spj_mode = SpjMode::Remote;
    cfg.endpoints.spj =
        spawn_stub(StubOptions { dim: 8, spj: SpjBehavior::Garbage }).expect("stub");
    let report = run_split(&corpus.split_file(25, "test"), &cfg).expect("remote spj run");
    assert_eq!(report.parse_failure_rate, 1.0, "every query saw malformed derivations");
    assert_eq!(report.overall_accuracy, 0.0, "all answers degraded");
    println!(
        "ACCEPTANCE PASS [6/9] grammar: 10^4 round trips exact, 10^5 fuzz inputs \
         ({rejected} rejected) with zero crashes; malformed remote output degraded to \
         Null with parse-failure rate 1.0"
    );
}

#[test]
fn c7_metric_unit_table_and_soft_dominates_exact_on_a_lexical_run() {
    // EM / F1 unit table.
    let num = |s: &str| Answer::Num(s.parse().unwrap());
    let set = |items: &[&str]| {
        Answer::StrSet(items.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>())
    };
    assert_eq!(exact_match(&Answer::Str("2".into()), &num("2")).unwrap(), 1);
    assert_eq!(exact_match(&Answer::Str("TRUE".into()), &Answer::Bool(true)).unwrap(), 1);
    assert_eq!(exact_match(&Answer::Str("70000".into()), &num("5839197")).unwrap(), 0);
    assert_eq!(set_f1(&set(&["a", "b"]), &set(&["a", "c"])).unwrap(), 0.5);
    assert_eq!(set_f1(&set(&["a", "b"]), &set(&["a", "b"])).unwrap(), 1.0);
    assert_eq!(set_f1(&set(&[]), &set(&[])).unwrap(), 1.0);
    assert_eq!(set_f1(&set(&[]), &set(&["a"])).unwrap(), 0.0);

    // Soft SSG P/R dominates exact on every query of a lexical-SSG run.
    let corpus = corpus();
    let mut cfg = PipelineConfig::default();
    cfg.ssg_mode = SsgMode::Lexical;
    let mut checked = 0usize;
    for size in [25u32, 50] {
        for entry in read_split(corpus.split_file(size, "test")).unwrap() {
            let ctx =
                factdb_engine::DbContext::new(&entry.db, &entry.queries, &cfg).expect("context");
            for query in &entry.queries {
                let (_, trace) = factdb_engine::run_query_in(&ctx, query, &cfg).expect("run");
                let predicted: BTreeSet<SupportSet> =
                    trace.support_sets.iter().cloned().collect();
                let (pe, re) =
                    ssg_precision_recall(&predicted, &query.gold_support_sets, MatchMode::Exact);
                let (ps, rs) =
                    ssg_precision_recall(&predicted, &query.gold_support_sets, MatchMode::Soft);
                assert!(ps >= pe && rs >= re, "query {}: soft ({ps},{rs}) < exact ({pe},{re})", query.id);
                checked += 1;
            }
        }
    }
    assert!(checked >= 80, "only {checked} lexical queries checked");
    println!(
        "ACCEPTANCE PASS [7/9] metrics: EM/F1 unit table holds (incl. {{a,b}} vs {{a,c}} \
         -> 0.5); soft P/R >= exact P/R on all {checked} queries of the lexical-SSG run"
    );
}

fn permuted_copy(db: &Database, seed: u64) -> Database {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut new_ids: Vec<u32> = (0..db.len() as u32).collect();
    new_ids.shuffle(&mut rng);
    let mut facts: Vec<Fact> = db
        .facts()
        .iter()
        .zip(&new_ids)
        .map(|(f, &id)| Fact::new(FactId(id), f.text.clone(), f.grounding.clone()).unwrap())
        .collect();
    facts.shuffle(&mut rng);
    // Exercise the file pathway too: write in shuffled order, read back.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shuffled.jsonl");
    let mut lines = String::new();
    for f in &facts {
        lines.push_str(&serde_json::to_string(f).unwrap());
        lines.push('\n');
    }
    std::fs::write(&path, lines).unwrap();
    Database::read_jsonl(&path).unwrap()
}

fn with_irrelevant_facts(db: &Database) -> Database {
    let next = db.facts().iter().map(|f| f.id.0).max().map_or(0, |m| m + 1);
    let mut facts = db.facts().to_vec();
    for (i, (s, o)) in [
        ("Zorblax Quine", "Cartographers Guild"),
        ("Mira Vectorovna", "Lunar Apiarists"),
        ("Tobias Underhill", "Society of Gnomon Readers"),
    ]
    .iter()
    .enumerate()
    {
        facts.push(
            Fact::new(
                FactId(next + i as u32),
                format!("{s} belongs to the {o}."),
                vec![factdb_core::Triple::new(
                    *s,
                    "memberOfGuild",
                    factdb_core::Value::entity(*o).unwrap(),
                )
                .unwrap()],
            )
            .unwrap(),
        );
    }
    Database::new(facts).unwrap()
}

#[test]
fn c8_invariance_suite_shuffle_injection_and_worker_count() {
    let pack = AppConfig::default().generation.pack;
    let cfg = PipelineConfig::default();

    // Fact-order shuffling (ids and file order) never changes an answer.
    let mut shuffles = 0usize;
    for (file, question, expected) in fixture_table() {
        let db = Database::read_jsonl(fixture(file)).unwrap();
        for seed in [1u64, 2, 3] {
            let shuffled = permuted_copy(&db, seed);
            let query = resolve_query(&shuffled, &pack, question).unwrap();
            let (answer, _) = run_query(&shuffled, &query, &cfg).unwrap();
            assert_eq!(render_answer(&answer), expected, "{file} seed {seed}");
            shuffles += 1;
        }
    }
    // Same property on generated data: ad-hoc resolution against a shuffled
    // copy reproduces the stored gold answer.
    let corpus = corpus();
    let entry = &read_split(corpus.split_file(25, "test")).unwrap()[0];
    let shuffled = permuted_copy(&entry.db, 99);
    for query in &entry.queries {
        let adhoc = resolve_query(&shuffled, &pack, &query.text).unwrap();
        let (answer, _) = run_query(&shuffled, &adhoc, &cfg).unwrap();
        assert!(
            answer_equal(&answer, query.gold_answer.as_ref().unwrap()),
            "shuffled {}: {answer:?}",
            query.id
        );
        shuffles += 1;
    }

    // Injecting facts about fresh entities/relations changes nothing.
    let mut injections = 0usize;
    for (file, question, expected) in fixture_table() {
        let db = with_irrelevant_facts(&Database::read_jsonl(fixture(file)).unwrap());
        let query = resolve_query(&db, &pack, question).unwrap();
        let (answer, _) = run_query(&db, &query, &cfg).unwrap();
        assert_eq!(render_answer(&answer), expected, "{file} with irrelevant facts");
        injections += 1;
    }

    // Worker count is invisible: byte-identical stable reports for 1 vs 8.
    let mut cfg1 = PipelineConfig::default();
    cfg1.worker_count = 1;
    let mut cfg8 = cfg1.clone();
    cfg8.worker_count = 8;
    let opts = RunOptions { split: "test".into(), collect_traces: false };
    let one = run_split_opts(corpus.dir.path(), &cfg1, &opts).unwrap().report;
    let eight = run_split_opts(corpus.dir.path(), &cfg8, &opts).unwrap().report;
    assert_eq!(one.stable_json(), eight.stable_json(), "oracle run differs by worker count");

    cfg1.ssg_mode = SsgMode::Lexical;
    cfg8.ssg_mode = SsgMode::Lexical;
    let file = corpus.split_file(25, "test");
    let one = run_split_opts(&file, &cfg1, &opts).unwrap().report;
    let eight = run_split_opts(&file, &cfg8, &opts).unwrap().report;
    assert_eq!(one.stable_json(), eight.stable_json(), "lexical run differs by worker count");

    println!(
        "ACCEPTANCE PASS [8/9] invariance: {shuffles} shuffles and {injections} \
         irrelevant-fact injections left oracle answers unchanged; worker_count 1 vs 8 \
         reports byte-identical"
    );
}

fn tree_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn c9_generation_is_deterministic_and_reports_stats() {
    // Library level: two runs of the same config are byte-identical trees.
    let config = GenConfig {
        sizes: vec![
            SizeSpec { db_size: 25, train: 2, valid: 1, test: 2, queries_per_db: 8 },
            SizeSpec { db_size: 50, train: 1, valid: 1, test: 1, queries_per_db: 7 },
        ],
        seed: 4242,
        ..GenConfig::default()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let stats = write_dataset(&config, a.path()).unwrap();
    write_dataset(&config, b.path()).unwrap();
    assert_eq!(tree_bytes(a.path()), tree_bytes(b.path()), "generation is not deterministic");

    // CLI level: `generate` twice with a fixed seed, identical trees.
    let (c, d) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [c.path(), d.path()] {
        let output = Command::new(env!("CARGO_BIN_EXE_factdb"))
            .args(["generate", "--sizes", "25", "--train", "1", "--valid", "1", "--test", "1"])
            .args(["--seed", "7", "--out"])
            .arg(dir.join("ds"))
            .output()
            .expect("binary runs");
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    }
    assert_eq!(tree_bytes(c.path()), tree_bytes(d.path()), "CLI generation differs across runs");

    // Stats report: emitted to stats.json with per-size query targets and
    // the ±50% band; presence (not the band itself) is the assertion.
    let raw = std::fs::read_to_string(a.path().join("stats.json")).expect("stats.json exists");
    let parsed: factdb_datagen::DatasetStats = serde_json::from_str(&raw).expect("stats parse");
    assert_eq!(parsed, stats);
    assert_eq!(parsed.sizes.len(), 2);
    let mut bands = Vec::new();
    for row in &parsed.sizes {
        assert!(row.target_queries_per_db > 0);
        assert!(row.mean_queries_per_db >= 0.0);
        bands.push(format!(
            "size {}: mean {:.1} vs target {} (within ±50%: {})",
            row.db_size, row.mean_queries_per_db, row.target_queries_per_db, row.within_50pct_band
        ));
    }
    println!(
        "ACCEPTANCE PASS [9/9] generation: byte-identical trees across repeated runs \
         (library and CLI); stats report present — {}",
        bands.join("; ")
    );
}
