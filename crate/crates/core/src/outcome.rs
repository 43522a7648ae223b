//! Results returned by algorithm drivers.

use serde::Serialize;

use crate::env::RegretLedger;
use crate::model::Matching;

/// Trajectory of a regret-minimisation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretRun {
    pub ledger: RegretLedger,
}

/// Answer of a pure-exploration run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExploreRun {
    pub recommendation: Matching,
    /// Steps (pairs or matchings) sampled before stopping.
    pub tau: u64,
    pub correct: bool,
}

/// Default cap on exploration length before a run is abandoned.
pub const DEFAULT_STEP_BUDGET: u64 = 5_000_000_000;
