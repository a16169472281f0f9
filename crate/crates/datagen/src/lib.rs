//! Synthetic dataset generator: knowledge graphs, verbalized fact
//! databases, queries with gold answers and gold support sets, and training
//! records for the SPJ operator and the support-set generator.

mod error;
pub mod dataset;
pub mod kg;
pub mod pack;
pub mod queries;
pub mod reference;
pub mod rng;
pub mod training;
pub mod verbalize;

pub use dataset::{read_split, write_dataset, DatasetStats, DbEntry};
pub use error::DatagenError;
pub use kg::{export_triples, generate_kg, ingest_triples, kg_from_db, KgPlan, KnowledgeGraph};
pub use pack::{fill_template, ObjectType, RelationSpec, TemplatePack};
pub use queries::{instantiate_queries, match_query, MatchedQuery, MAX_GOLD_SET_FACTS};
pub use reference::{execute_reference, gold_support_sets, TripleIndex};
pub use training::{
    emit_spj_training, emit_ssg_training, NegConfig, SpjTrainingRecord, SsgTrainingRecord,
};
pub use verbalize::verbalize_kg;

use serde::{Deserialize, Serialize};

/// Per-size dataset targets: database count per split and queries per DB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeSpec {
    pub db_size: u32,
    pub train: u32,
    pub valid: u32,
    pub test: u32,
    pub queries_per_db: u32,
}

/// Full generation configuration. Generation is a pure function of
/// (config, seed): same config and seed give byte-identical output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub pack: TemplatePack,
    pub sizes: Vec<SizeSpec>,
    pub composite_fact_rate: f64,
    pub spj_negatives: NegConfig,
    pub seed: u64,
}

impl Default for GenConfig {
    /// Benchmark-scale defaults: six database sizes with the standard
    /// train/valid/test DB counts and per-DB query targets.
    fn default() -> Self {
        let table = [
            (25u32, 4000u32, 631u32, 621u32, 8u32),
            (50, 4986, 498, 499, 7),
            (100, 2500, 250, 250, 13),
            (250, 1000, 100, 100, 53),
            (500, 500, 50, 50, 66),
            (1000, 250, 25, 25, 70),
        ];
        GenConfig {
            pack: TemplatePack::builtin(),
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
            composite_fact_rate: 0.3,
            spj_negatives: NegConfig::default(),
            seed: 7,
        }
    }
}

impl GenConfig {
    /// Default settings but a caller-chosen size table (used by tests and
    /// the CLI's --sizes/--dbs flags).
    pub fn with_sizes(sizes: Vec<SizeSpec>) -> GenConfig {
        GenConfig { sizes, ..GenConfig::default() }
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        self.pack.validate()?;
        if self.sizes.is_empty() {
            return Err(DatagenError::Config("at least one DB size is required".into()));
        }
        for s in &self.sizes {
            if s.db_size == 0 {
                return Err(DatagenError::Config("db_size must be positive".into()));
            }
        }
        for (name, v) in [
            ("composite_fact_rate", self.composite_fact_rate),
            ("negative_ratio", self.spj_negatives.negative_ratio),
            ("distractor_rate", self.spj_negatives.distractor_rate),
        ] {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(DatagenError::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}
