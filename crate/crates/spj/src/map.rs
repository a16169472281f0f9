//! Deterministic parallel map of an SPJ implementation over support sets.

use factdb_core::{Database, Query, SupportSet};
use rayon::prelude::*;

use crate::{Derivation, SpjOperator};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpjMapOutput {
    /// Canonically ordered (by support-set identity) and deduplicated.
    pub pairs: Vec<(SupportSet, Derivation)>,
    /// Per-item operator errors, degraded to Null.
    pub errors: usize,
}

/// Apply `op` to each support set independently. Output order is canonical
/// by support-set identity regardless of input order or worker count;
/// per-item errors degrade to Null and are counted, never aborting the
/// batch.
pub fn spj_map(
    query: &Query,
    sets: &[SupportSet],
    op: &dyn SpjOperator,
    db: &Database,
) -> SpjMapOutput {
    let mut canonical: Vec<SupportSet> = sets.to_vec();
    canonical.sort();
    canonical.dedup();

    let results: Vec<(SupportSet, Result<Derivation, crate::SpjError>)> = canonical
        .into_par_iter()
        .map(|set| {
            let d = op.derive(query, &set, db);
            (set, d)
        })
        .collect();

    let mut errors = 0;
    let pairs = results
        .into_iter()
        .map(|(set, res)| match res {
            Ok(d) => (set, d),
            Err(_) => {
                errors += 1;
                (set, Derivation::Null)
            }
        })
        .collect();
    SpjMapOutput { pairs, errors }
}
