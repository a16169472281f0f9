//! Configuration: one JSON document covering the pipeline and the dataset
//! generator, fully defaulted and dumpable via `config --print-defaults`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use factdb_datagen::GenConfig;
use factdb_ssg::{SsgConfig, DEFAULT_DIM};
use serde::{Deserialize, Serialize};

use crate::error::EngineError;

/// Fallback k for the TF-IDF baseline when `--mode tfidf` is given without
/// an explicit count.
pub const DEFAULT_TFIDF_K: usize = 5;

/// Support-set generation backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SsgMode {
    /// Score actions from gold support sets (retrieval upper bound).
    Oracle,
    /// Hashed lexical bi-encoder with exact MIPS.
    Lexical,
    /// Top-k TF-IDF ranking; each of the k best facts becomes a singleton
    /// support set.
    TfIdf { k: usize },
    /// Remote bi-encoder over HTTP (`POST /encode`).
    Remote,
}

impl fmt::Display for SsgMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SsgMode::Oracle => f.write_str("oracle"),
            SsgMode::Lexical => f.write_str("lexical"),
            SsgMode::TfIdf { k } => write!(f, "tfidf-{k}"),
            SsgMode::Remote => f.write_str("remote"),
        }
    }
}

impl FromStr for SsgMode {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<SsgMode, EngineError> {
        match s {
            "oracle" => Ok(SsgMode::Oracle),
            "lexical" => Ok(SsgMode::Lexical),
            "remote" => Ok(SsgMode::Remote),
            "tfidf" => Ok(SsgMode::TfIdf { k: DEFAULT_TFIDF_K }),
            other => {
                if let Some(raw) = other.strip_prefix("tfidf-") {
                    let k: usize = raw.parse().map_err(|_| {
                        EngineError::Usage(format!("bad tfidf k in mode {other:?}"))
                    })?;
                    if k == 0 {
                        return Err(EngineError::Usage("tfidf k must be positive".into()));
                    }
                    return Ok(SsgMode::TfIdf { k });
                }
                Err(EngineError::Usage(format!(
                    "unknown ssg mode {other:?} (expected oracle|lexical|tfidf-k|remote)"
                )))
            }
        }
    }
}

impl TryFrom<String> for SsgMode {
    type Error = String;
    fn try_from(s: String) -> Result<SsgMode, String> {
        s.parse().map_err(|e: EngineError| e.to_string())
    }
}

impl From<SsgMode> for String {
    fn from(m: SsgMode) -> String {
        m.to_string()
    }
}

/// Select-project-join backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SpjMode {
    Oracle,
    Remote,
}

impl fmt::Display for SpjMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpjMode::Oracle => f.write_str("oracle"),
            SpjMode::Remote => f.write_str("remote"),
        }
    }
}

impl FromStr for SpjMode {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<SpjMode, EngineError> {
        match s {
            "oracle" => Ok(SpjMode::Oracle),
            "remote" => Ok(SpjMode::Remote),
            other => Err(EngineError::Usage(format!(
                "unknown spj mode {other:?} (expected oracle|remote)"
            ))),
        }
    }
}

impl TryFrom<String> for SpjMode {
    type Error = String;
    fn try_from(s: String) -> Result<SpjMode, String> {
        s.parse().map_err(|e: EngineError| e.to_string())
    }
}

impl From<SpjMode> for String {
    fn from(m: SpjMode) -> String {
        m.to_string()
    }
}

/// Whether support sets come from the retriever or from gold annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RetrievalMode {
    /// Run the configured SSG backend.
    Retrieved,
    /// Bypass SSG and feed the gold support sets straight to SPJ.
    PerfectIr,
}

impl fmt::Display for RetrievalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetrievalMode::Retrieved => f.write_str("retrieved"),
            RetrievalMode::PerfectIr => f.write_str("perfectir"),
        }
    }
}

impl FromStr for RetrievalMode {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<RetrievalMode, EngineError> {
        match s {
            "retrieved" => Ok(RetrievalMode::Retrieved),
            "perfectir" => Ok(RetrievalMode::PerfectIr),
            other => Err(EngineError::Usage(format!(
                "unknown retrieval mode {other:?} (expected retrieved|perfectir)"
            ))),
        }
    }
}

impl TryFrom<String> for RetrievalMode {
    type Error = String;
    fn try_from(s: String) -> Result<RetrievalMode, String> {
        s.parse().map_err(|e: EngineError| e.to_string())
    }
}

impl From<RetrievalMode> for String {
    fn from(m: RetrievalMode) -> String {
        m.to_string()
    }
}

/// `host:port` addresses of the remote services.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Endpoints {
    /// Bi-encoder service (`POST /encode`).
    pub encoder: String,
    /// SPJ service (`POST /spj`).
    pub spj: String,
}

impl Default for Endpoints {
    fn default() -> Endpoints {
        Endpoints { encoder: "127.0.0.1:8745".into(), spj: "127.0.0.1:8737".into() }
    }
}

/// End-to-end pipeline settings. Defaults run the oracle components with
/// retrieved support sets; any field may be overridden from the config file
/// or the CLI flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub ssg_mode: SsgMode,
    pub spj_mode: SpjMode,
    pub retrieval_mode: RetrievalMode,
    pub ssg: SsgConfig,
    /// Embedding dimension; remote encoders must return vectors of exactly
    /// this length.
    pub dim: usize,
    pub endpoints: Endpoints,
    /// Worker threads for per-query parallelism; 0 means the library
    /// default. Results are byte-identical for any value.
    pub worker_count: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            ssg_mode: SsgMode::Oracle,
            spj_mode: SpjMode::Oracle,
            retrieval_mode: RetrievalMode::Retrieved,
            ssg: SsgConfig::default(),
            dim: DEFAULT_DIM,
            endpoints: Endpoints::default(),
            worker_count: 0,
            seed: 7,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        self.ssg
            .validate()
            .map_err(|e| EngineError::Usage(format!("ssg config: {e}")))?;
        if self.dim < 2 {
            return Err(EngineError::Usage("dim must be at least 2".into()));
        }
        if let SsgMode::TfIdf { k } = self.ssg_mode {
            if k == 0 {
                return Err(EngineError::Usage("tfidf k must be positive".into()));
            }
        }
        if self.ssg_mode == SsgMode::Remote && self.endpoints.encoder.is_empty() {
            return Err(EngineError::Usage("remote ssg mode needs endpoints.encoder".into()));
        }
        if self.spj_mode == SpjMode::Remote && self.endpoints.spj.is_empty() {
            return Err(EngineError::Usage("remote spj mode needs endpoints.spj".into()));
        }
        Ok(())
    }
}

/// The single on-disk configuration document: pipeline settings plus the
/// dataset generator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct AppConfig {
    pub pipeline: PipelineConfig,
    pub generation: GenConfig,
}

impl AppConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<AppConfig, EngineError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path)
            .map_err(|e| EngineError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let config: AppConfig = serde_json::from_str(&raw)
            .map_err(|e| EngineError::Usage(format!("bad config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.pipeline.validate()?;
        self.generation
            .validate()
            .map_err(|e| EngineError::Usage(format!("generation config: {e}")))?;
        Ok(())
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_strings_round_trip() {
        for s in ["oracle", "lexical", "tfidf-3", "remote"] {
            let m: SsgMode = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert_eq!("tfidf".parse::<SsgMode>().unwrap(), SsgMode::TfIdf { k: DEFAULT_TFIDF_K });
        assert!("bm25".parse::<SsgMode>().is_err());
        assert!("tfidf-0".parse::<SsgMode>().is_err());
        assert!("tfidf-x".parse::<SsgMode>().is_err());
        assert_eq!("perfectir".parse::<RetrievalMode>().unwrap(), RetrievalMode::PerfectIr);
        assert!("whole-db".parse::<RetrievalMode>().is_err());
        assert_eq!("remote".parse::<SpjMode>().unwrap(), SpjMode::Remote);
        assert!("neural".parse::<SpjMode>().is_err());
    }

    #[test]
    fn defaults_serialize_and_reload() {
        let config = AppConfig::default();
        config.validate().unwrap();
        let json = config.to_pretty_json();
        let back: AppConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
        assert_eq!(back.pipeline.ssg_mode, SsgMode::Oracle);
        assert_eq!(back.pipeline.dim, DEFAULT_DIM);
    }

    #[test]
    fn partial_config_document_fills_defaults() {
        let config: AppConfig =
            serde_json::from_str(r#"{"pipeline": {"ssg_mode": "tfidf-9", "worker_count": 4}}"#)
                .unwrap();
        assert_eq!(config.pipeline.ssg_mode, SsgMode::TfIdf { k: 9 });
        assert_eq!(config.pipeline.worker_count, 4);
        assert_eq!(config.pipeline.spj_mode, SpjMode::Oracle);
        assert!(!config.generation.sizes.is_empty());
    }

    #[test]
    fn validation_rejects_bad_settings() {
        let mut config = AppConfig::default();
        config.pipeline.ssg.tau = f64::NAN;
        assert!(matches!(config.validate(), Err(EngineError::Usage(_))));

        let mut config = AppConfig::default();
        config.pipeline.ssg_mode = SsgMode::Remote;
        config.pipeline.endpoints.encoder = String::new();
        assert!(matches!(config.validate(), Err(EngineError::Usage(_))));

        let mut config = AppConfig::default();
        config.pipeline.dim = 1;
        assert!(matches!(config.validate(), Err(EngineError::Usage(_))));
    }

    #[test]
    fn load_reports_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        assert!(matches!(AppConfig::load(&path), Err(EngineError::Usage(_))));
        std::fs::write(&path, "{ not json").unwrap();
        assert!(matches!(AppConfig::load(&path), Err(EngineError::Usage(_))));
        std::fs::write(&path, AppConfig::default().to_pretty_json()).unwrap();
        assert!(AppConfig::load(&path).is_ok());
    }
}
