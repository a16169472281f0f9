use factdb_core::FactId;
use serde::{Deserialize, Serialize};

use crate::error::SsgError;

/// Bounds for the support-set expansion loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsgConfig {
    /// Minimum inner-product score an action needs to be taken.
    pub tau: f64,
    /// Maximum support-set size; larger partial sets are discarded.
    pub m_max: usize,
    /// Maximum number of open sets kept per iteration.
    pub b_max: usize,
    /// Maximum number of actions taken per expansion.
    pub k_max: usize,
}

impl Default for SsgConfig {
    fn default() -> SsgConfig {
        SsgConfig { tau: 0.35, m_max: 3, b_max: 64, k_max: 8 }
    }
}

impl SsgConfig {
    /// Caps wide enough that a perfect scorer is never clipped: the 0/1
    /// oracle needs room for every gold extension, not just the top few.
    pub fn oracle() -> SsgConfig {
        SsgConfig { tau: 0.5, m_max: 3, b_max: 4096, k_max: 4096 }
    }

    pub fn validate(&self) -> Result<(), SsgError> {
        if self.tau.is_nan() {
            return Err(SsgError::Config("tau must not be NaN".into()));
        }
        if self.m_max < 1 {
            return Err(SsgError::Config("m_max must be >= 1".into()));
        }
        if self.b_max < 1 || self.k_max < 1 {
            return Err(SsgError::Config("b_max and k_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// What an expansion step can do: add one fact or close the current set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ActionKind {
    Stop,
    AddFact(FactId),
}

/// One scored action. The score is the inner product that selected it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub kind: ActionKind,
    pub score: f64,
}

/// The shared selection contract every scorer honours: keep scores ≥ τ,
/// order by score descending with ties broken by STOP first then fact id
/// ascending, truncate to `k_max`. STOP competes in the same pool as facts.
pub fn select_actions(mut actions: Vec<Action>, cfg: &SsgConfig) -> Vec<Action> {
    actions.retain(|a| a.score >= cfg.tau);
    actions.sort_by(|a, b| {
        b.score.total_cmp(&a.score).then_with(|| a.kind.cmp(&b.kind))
    });
    actions.truncate(cfg.k_max);
    actions
}
