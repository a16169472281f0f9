use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use factdb_core::Database;
use sha2::{Digest, Sha256};

use crate::action::{select_actions, Action, ActionKind, SsgConfig};
use crate::embed::EmbeddingVector;
use crate::encoder::BiEncoder;
use crate::error::SsgError;

const MAGIC: &[u8; 8] = b"FACTIDX1";

/// Precomputed fact matrix U plus the STOP row. Row i is fact i of the
/// database in id order; the final row is STOP. The digest pins the index to
/// the exact database contents.
#[derive(Debug)]
pub struct IndexedDatabase<'a> {
    db: &'a Database,
    dim: usize,
    fact_rows: Vec<EmbeddingVector>,
    stop_row: EmbeddingVector,
    db_hash: [u8; 32],
}

/// Canonical database digest: SHA-256 over the JSONL serialization of the
/// facts in id order.
pub fn db_digest(db: &Database) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for fact in db.facts() {
        hasher.update(serde_json::to_string(fact).expect("facts serialize").as_bytes());
        hasher.update(b"\n");
    }
    let out = hasher.finalize();
    let mut digest = [0u8; 32];
    digest.copy_from_slice(&out);
    digest
}

/// Encode every fact plus STOP. Fact vectors are static per database, so
/// this runs once up front and `mips` only scans.
pub fn build_index<'a>(
    db: &'a Database,
    enc: &dyn BiEncoder,
) -> Result<IndexedDatabase<'a>, SsgError> {
    if db.is_empty() {
        return Err(SsgError::EmptyDatabase);
    }
    let dim = enc.dim();
    let mut fact_rows = Vec::with_capacity(db.len());
    for fact in db.facts() {
        let row = enc.encode_fact(fact);
        if row.dim() != dim {
            return Err(SsgError::DimensionMismatch { expected: dim, got: row.dim() });
        }
        fact_rows.push(row);
    }
    let stop_row = enc.stop_vector();
    if stop_row.dim() != dim {
        return Err(SsgError::DimensionMismatch { expected: dim, got: stop_row.dim() });
    }
    Ok(IndexedDatabase { db, dim, fact_rows, stop_row, db_hash: db_digest(db) })
}

impl<'a> IndexedDatabase<'a> {
    pub fn db(&self) -> &'a Database {
        self.db
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of matrix rows: one per fact plus the STOP row.
    pub fn num_rows(&self) -> usize {
        self.fact_rows.len() + 1
    }

    pub fn fact_rows(&self) -> &[EmbeddingVector] {
        &self.fact_rows
    }

    pub fn stop_row(&self) -> &EmbeddingVector {
        &self.stop_row
    }

    pub fn db_hash(&self) -> [u8; 32] {
        self.db_hash
    }

    /// Persist as little-endian binary: magic, dim, row count, database
    /// digest, then the rows (facts in id order, STOP last) as f32s.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SsgError> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        out.write_all(MAGIC)?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        out.write_all(&(self.num_rows() as u32).to_le_bytes())?;
        out.write_all(&self.db_hash)?;
        for row in self.fact_rows.iter().chain(std::iter::once(&self.stop_row)) {
            for &v in row.as_slice() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Load an index persisted by [`IndexedDatabase::save`], verifying that
    /// it matches this exact database.
    pub fn load(
        path: impl AsRef<Path>,
        db: &'a Database,
    ) -> Result<IndexedDatabase<'a>, SsgError> {
        let mut reader = BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 8];
        reader.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SsgError::BadIndex("bad magic".into()));
        }
        let mut word = [0u8; 4];
        reader.read_exact(&mut word)?;
        let dim = u32::from_le_bytes(word) as usize;
        reader.read_exact(&mut word)?;
        let rows = u32::from_le_bytes(word) as usize;
        let mut stored_hash = [0u8; 32];
        reader.read_exact(&mut stored_hash)?;
        if dim == 0 || rows != db.len() + 1 {
            return Err(SsgError::BadIndex(format!(
                "shape {rows}x{dim} does not fit a {}-fact database",
                db.len()
            )));
        }
        if stored_hash != db_digest(db) {
            return Err(SsgError::BadIndex("database digest mismatch".into()));
        }
        let mut read_row = || -> Result<EmbeddingVector, SsgError> {
            let mut buf = vec![0u8; dim * 4];
            reader.read_exact(&mut buf)?;
            let values = buf
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            EmbeddingVector::new(values)
                .map_err(|e| SsgError::BadIndex(format!("corrupt row: {e}")))
        };
        let mut fact_rows = Vec::with_capacity(rows - 1);
        for _ in 0..rows - 1 {
            fact_rows.push(read_row()?);
        }
        let stop_row = read_row()?;
        Ok(IndexedDatabase { db, dim, fact_rows, stop_row, db_hash: stored_hash })
    }

    /// Load if the file matches this database, otherwise rebuild with the
    /// encoder and overwrite the file.
    pub fn load_or_build(
        path: impl AsRef<Path>,
        db: &'a Database,
        enc: &dyn BiEncoder,
    ) -> Result<IndexedDatabase<'a>, SsgError> {
        let path = path.as_ref();
        if path.exists() {
            if let Ok(index) = IndexedDatabase::load(path, db) {
                return Ok(index);
            }
        }
        let index = build_index(db, enc)?;
        index.save(path)?;
        Ok(index)
    }
}

/// Exhaustive exact maximum-inner-product search over U (all facts plus
/// STOP), returning the actions selected under `cfg`. This scan is the
/// reference semantics; any accelerated index must reproduce it exactly.
pub fn mips(
    index: &IndexedDatabase,
    state: &EmbeddingVector,
    cfg: &SsgConfig,
) -> Result<Vec<Action>, SsgError> {
    if state.dim() != index.dim {
        return Err(SsgError::DimensionMismatch { expected: index.dim, got: state.dim() });
    }
    let mut actions = Vec::with_capacity(index.num_rows());
    for (row, fact) in index.fact_rows.iter().zip(index.db.facts()) {
        actions.push(Action { kind: ActionKind::AddFact(fact.id), score: row.dot(state) });
    }
    actions.push(Action { kind: ActionKind::Stop, score: index.stop_row.dot(state) });
    Ok(select_actions(actions, cfg))
}
