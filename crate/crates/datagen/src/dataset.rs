//! End-to-end dataset writer: one directory per DB size holding
//! train/valid/test JSONL splits, plus SPJ/SSG training emissions (from the
//! smallest size's train split) and a stats report.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use factdb_core::{Database, Fact, Query};
use serde::{Deserialize, Serialize};

use crate::error::DatagenError;
use crate::kg::generate_kg;
use crate::queries::instantiate_queries;
use crate::rng::{derive_seed, SPLIT_TEST, SPLIT_TRAIN, SPLIT_VALID};
use crate::training::{emit_spj_training, emit_ssg_training};
use crate::verbalize::verbalize_kg;
use crate::GenConfig;

pub const SPLITS: [(&str, u64); 3] =
    [("train", SPLIT_TRAIN), ("valid", SPLIT_VALID), ("test", SPLIT_TEST)];

/// One line of a split file: a database (list of facts) and its queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DbRecord {
    #[serde(default)]
    db_id: String,
    db: Vec<Fact>,
    queries: Vec<Query>,
}

/// A parsed split entry.
#[derive(Debug, Clone)]
pub struct DbEntry {
    pub db_id: String,
    pub db: Database,
    pub queries: Vec<Query>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStats {
    pub dbs: u64,
    pub queries: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeStats {
    pub db_size: u32,
    pub splits: BTreeMap<String, SplitStats>,
    pub mean_queries_per_db: f64,
    pub target_queries_per_db: u32,
    /// Soft constraint: mean within ±50% of the target (reported only).
    pub within_50pct_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub sizes: Vec<SizeStats>,
    pub total_dbs: u64,
    pub total_queries: u64,
    pub spj_training_records: u64,
    pub ssg_training_records: u64,
}

/// Generate the full corpus under `out_dir`. Pure function of the config:
/// repeated runs produce byte-identical trees. SPJ/SSG training records are
/// emitted from the smallest size's train split.
pub fn write_dataset(config: &GenConfig, out_dir: impl AsRef<Path>) -> Result<DatasetStats, DatagenError> {
    config.validate()?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;

    let smallest = config.sizes.iter().map(|s| s.db_size).min().expect("validated non-empty");
    let mut spj_file = std::io::BufWriter::new(std::fs::File::create(out_dir.join("spj_train.jsonl"))?);
    let mut ssg_file = std::io::BufWriter::new(std::fs::File::create(out_dir.join("ssg_train.jsonl"))?);

    let mut stats = DatasetStats {
        sizes: Vec::new(),
        total_dbs: 0,
        total_queries: 0,
        spj_training_records: 0,
        ssg_training_records: 0,
    };

    for spec in &config.sizes {
        let size_dir = out_dir.join(format!("size-{}", spec.db_size));
        std::fs::create_dir_all(&size_dir)?;
        let mut size_stats = SizeStats {
            db_size: spec.db_size,
            splits: BTreeMap::new(),
            mean_queries_per_db: 0.0,
            target_queries_per_db: spec.queries_per_db,
            within_50pct_band: false,
        };

        for (split_name, split_salt) in SPLITS {
            let count = match split_name {
                "train" => spec.train,
                "valid" => spec.valid,
                _ => spec.test,
            };
            let mut file =
                std::io::BufWriter::new(std::fs::File::create(size_dir.join(format!("{split_name}.jsonl")))?);
            let mut split_stats = SplitStats::default();

            for i in 0..count {
                let db_seed =
                    derive_seed(config.seed, &[split_salt, spec.db_size as u64, i as u64]);
                let db_id = format!("{split_name}-{}-{i:04}", spec.db_size);
                let kg = generate_kg(config, spec.db_size, derive_seed(db_seed, &[1]))?;
                let db = verbalize_kg(
                    &kg,
                    &config.pack,
                    config.composite_fact_rate,
                    derive_seed(db_seed, &[2]),
                )?;
                let queries = instantiate_queries(
                    &kg,
                    &db,
                    &config.pack,
                    spec.queries_per_db as usize,
                    derive_seed(db_seed, &[3]),
                    &db_id,
                )?;

                split_stats.dbs += 1;
                split_stats.queries += queries.len() as u64;

                if split_name == "train" && spec.db_size == smallest {
                    let spj = emit_spj_training(
                        &db,
                        &queries,
                        config.spj_negatives,
                        derive_seed(db_seed, &[4]),
                        &db_id,
                    )?;
                    for record in &spj {
                        serde_json::to_writer(&mut spj_file, record)?;
                        spj_file.write_all(b"\n")?;
                    }
                    stats.spj_training_records += spj.len() as u64;
                    let ssg = emit_ssg_training(&db, &queries, &db_id);
                    for record in &ssg {
                        serde_json::to_writer(&mut ssg_file, record)?;
                        ssg_file.write_all(b"\n")?;
                    }
                    stats.ssg_training_records += ssg.len() as u64;
                }

                let record = DbRecord { db_id, db: db.facts().to_vec(), queries };
                serde_json::to_writer(&mut file, &record)?;
                file.write_all(b"\n")?;
            }
            file.flush()?;
            size_stats.splits.insert(split_name.to_string(), split_stats);
        }

        let dbs: u64 = size_stats.splits.values().map(|s| s.dbs).sum();
        let queries: u64 = size_stats.splits.values().map(|s| s.queries).sum();
        size_stats.mean_queries_per_db =
            if dbs == 0 { 0.0 } else { queries as f64 / dbs as f64 };
        let target = spec.queries_per_db as f64;
        size_stats.within_50pct_band =
            (size_stats.mean_queries_per_db - target).abs() <= 0.5 * target;
        stats.total_dbs += dbs;
        stats.total_queries += queries;
        stats.sizes.push(size_stats);
    }
    spj_file.flush()?;
    ssg_file.flush()?;

    let stats_file = std::fs::File::create(out_dir.join("stats.json"))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(stats_file), &stats)?;
    Ok(stats)
}

/// Read one split file back into databases + queries, validating gold
/// invariants against each database.
pub fn read_split(path: impl AsRef<Path>) -> Result<Vec<DbEntry>, DatagenError> {
    let file = std::fs::File::open(&path)?;
    let mut entries = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DbRecord = serde_json::from_str(&line).map_err(|e| {
            DatagenError::TripleFile { line: lineno + 1, reason: format!("bad split record: {e}") }
        })?;
        let db = Database::new(record.db)?;
        for q in &record.queries {
            q.validate_against(&db)?;
        }
        let db_id = if record.db_id.is_empty() {
            format!("line-{}", lineno + 1)
        } else {
            record.db_id
        };
        entries.push(DbEntry { db_id, db, queries: record.queries });
    }
    Ok(entries)
}
