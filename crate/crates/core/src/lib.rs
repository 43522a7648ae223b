//! Rank-1 matching bandits: simulation, elimination algorithms, baselines,
//! closed-form bound calculators and an experiment harness.

pub mod adaptive_matching;
pub mod baselines;
pub mod bounds;
pub mod confbound;
pub mod env;
pub mod error;
pub mod harness;
pub mod matching_id;
pub mod model;
pub mod outcome;
pub mod pair_elim;
pub mod pair_elim_mono;
pub mod ranking;

pub use error::{Error, Result};
