//! Multi-seed experiment execution, aggregation and file output.
//!
//! Each run `r` uses seed `base_seed + r`. Runs may execute in parallel;
//! their results are always assembled in run order, so outputs depend only
//! on the configuration.

mod generators;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptive_matching::{self, Variant};
use crate::baselines;
use crate::error::{Error, Result};
use crate::model::{MatchMode, Matching, Rank1Instance, RewardDist};
use crate::outcome::{ExploreRun, RegretRun};
use crate::{matching_id, pair_elim, pair_elim_mono};

pub use generators::{
    generate_bipartite, generate_mono_centered, generate_mono_equalpairs, GeneratorSpec,
};
pub use output::{
    aggregate_explore, aggregate_regret, nearest_rank, write_outputs, ExploreAggregate, QuantileRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgoId {
    PairElim,
    Rank1Elim,
    PairElimMono,
    Uniform,
    Sam,
    AdaptiveMatching,
    Escb,
    PairSelect,
    MatchingId,
}

impl AlgoId {
    pub const ALL: [AlgoId; 9] = [
        AlgoId::PairElim,
        AlgoId::Rank1Elim,
        AlgoId::PairElimMono,
        AlgoId::Uniform,
        AlgoId::Sam,
        AlgoId::AdaptiveMatching,
        AlgoId::Escb,
        AlgoId::PairSelect,
        AlgoId::MatchingId,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgoId::PairElim => "pair-elim",
            AlgoId::Rank1Elim => "rank1-elim",
            AlgoId::PairElimMono => "pair-elim-mono",
            AlgoId::Uniform => "uniform",
            AlgoId::Sam => "sam",
            AlgoId::AdaptiveMatching => "adaptive-matching",
            AlgoId::Escb => "escb",
            AlgoId::PairSelect => "pair-select",
            AlgoId::MatchingId => "matching-id",
        }
    }

    /// Whether the algorithm plays single pairs or whole matchings.
    pub fn selection(self) -> Option<Selection> {
        match self {
            AlgoId::PairElim | AlgoId::Rank1Elim | AlgoId::PairElimMono | AlgoId::PairSelect => {
                Some(Selection::Pair)
            }
            AlgoId::Sam | AlgoId::AdaptiveMatching | AlgoId::Escb | AlgoId::MatchingId => {
                Some(Selection::Matching)
            }
            AlgoId::Uniform => None,
        }
    }
}

impl fmt::Display for AlgoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgoId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgoId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown algorithm id {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Pair,
    Matching,
}

impl From<Selection> for MatchMode {
    fn from(s: Selection) -> Self {
        match s {
            Selection::Pair => MatchMode::Minimal,
            Selection::Matching => MatchMode::Maximal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RunMode {
    Regret { horizon: u64 },
    Explore { delta: f64 },
}

fn default_runs() -> usize {
    20
}

fn default_dist() -> RewardDist {
    RewardDist::Bernoulli
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    #[serde(default = "default_dist")]
    pub dist: RewardDist,
    pub algo: AlgoId,
    /// Overrides the algorithm's own setting; needed only for `uniform`.
    #[serde(default)]
    pub selection: Option<Selection>,
    pub mode: RunMode,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Keep only the final checkpoint of each regret trajectory.
    #[serde(default)]
    pub final_only: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Parameter("runs must be at least 1".into()));
        }
        if let (Some(own), Some(asked)) = (self.algo.selection(), self.selection) {
            if own != asked {
                return Err(Error::Parameter(format!(
                    "{} plays {own:?} actions, not {asked:?}",
                    self.algo
                )));
            }
        }
        match (self.algo, self.mode) {
            (AlgoId::PairElim | AlgoId::PairElimMono, _) => Ok(()),
            (AlgoId::PairSelect | AlgoId::MatchingId, RunMode::Explore { .. }) => Ok(()),
            (
                AlgoId::Rank1Elim
                | AlgoId::Uniform
                | AlgoId::Sam
                | AlgoId::AdaptiveMatching
                | AlgoId::Escb,
                RunMode::Regret { .. },
            ) => Ok(()),
            (algo, mode) => Err(Error::Parameter(format!(
                "{algo} does not support {mode:?}"
            ))),
        }
    }

    pub fn seed(&self, run_id: usize) -> u64 {
        self.base_seed.wrapping_add(run_id as u64)
    }

    fn selection(&self) -> Selection {
        self.selection
            .or(self.algo.selection())
            .unwrap_or(Selection::Matching)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RunOutcome {
    Regret {
        checkpoints: Vec<(u64, f64)>,
    },
    Explore {
        tau: u64,
        correct: bool,
        recommendation: Matching,
    },
    Failed {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub algo: AlgoId,
    pub seed: u64,
    /// Empty when the instance could not be generated.
    pub instance_digest: String,
    pub mode: RunMode,
    pub outcome: RunOutcome,
}

impl RunRecord {
    pub fn status(&self) -> &str {
        match &self.outcome {
            RunOutcome::Failed { .. } => "failed",
            _ => "ok",
        }
    }

    pub fn final_regret(&self) -> Option<f64> {
        match &self.outcome {
            RunOutcome::Regret { checkpoints } => checkpoints.last().map(|c| c.1),
            _ => None,
        }
    }

    pub fn explore(&self) -> Option<(u64, bool)> {
        match &self.outcome {
            RunOutcome::Explore { tau, correct, .. } => Some((*tau, *correct)),
            _ => None,
        }
    }
}

fn regret_of(
    algo: AlgoId,
    inst: &Rank1Instance,
    horizon: u64,
    selection: Selection,
    seed: u64,
) -> Result<RegretRun> {
    match algo {
        AlgoId::PairElim => pair_elim::run_regret(inst, horizon, seed),
        AlgoId::Rank1Elim => baselines::rank1elim_run(inst, horizon, seed),
        AlgoId::PairElimMono => pair_elim_mono::run_regret(inst, horizon, seed),
        AlgoId::Uniform => baselines::uniform_random_run(inst, horizon, selection.into(), seed),
        AlgoId::Sam => adaptive_matching::run_regret(inst, horizon, Variant::Simple, seed),
        AlgoId::AdaptiveMatching => {
            adaptive_matching::run_regret(inst, horizon, Variant::Full, seed)
        }
        AlgoId::Escb => baselines::escb_run(inst, horizon, seed),
        AlgoId::PairSelect | AlgoId::MatchingId => {
            Err(Error::Parameter(format!("{algo} has no regret mode")))
        }
    }
}

fn explore_of(algo: AlgoId, inst: &Rank1Instance, delta: f64, seed: u64) -> Result<ExploreRun> {
    match algo {
        AlgoId::PairElim => pair_elim::run_explore(inst, delta, seed),
        AlgoId::PairElimMono => pair_elim_mono::run_explore(inst, delta, seed),
        AlgoId::PairSelect => pair_elim_mono::pair_select(inst, delta, seed).map(|r| r.run),
        AlgoId::MatchingId => matching_id::run(inst, delta, seed),
        _ => Err(Error::Parameter(format!("{algo} has no exploration mode"))),
    }
}

/// Executes one run; algorithm errors become a failed outcome.
pub fn run_one(config: &ExperimentConfig, run_id: usize) -> RunRecord {
    let seed = config.seed(run_id);
    let instance = config
        .generator
        .instance(seed)
        .and_then(|i| i.with_dist(config.dist));
    let digest = instance
        .as_ref()
        .map(Rank1Instance::digest)
        .unwrap_or_default();
    let outcome = instance.and_then(|inst| match config.mode {
        RunMode::Regret { horizon } => {
            regret_of(config.algo, &inst, horizon, config.selection(), seed).map(|r| {
                let mut checkpoints = r.ledger.checkpoints;
                if config.final_only {
                    checkpoints.drain(..checkpoints.len().saturating_sub(1));
                }
                RunOutcome::Regret { checkpoints }
            })
        }
        RunMode::Explore { delta } => {
            explore_of(config.algo, &inst, delta, seed).map(|r| RunOutcome::Explore {
                tau: r.tau,
                correct: r.correct,
                recommendation: r.recommendation,
            })
        }
    });
    RunRecord {
        run_id,
        algo: config.algo,
        seed,
        instance_digest: digest,
        mode: config.mode,
        outcome: outcome.unwrap_or_else(|e| RunOutcome::Failed {
            message: e.to_string(),
        }),
    }
}

/// Executes all runs on the current rayon pool, returned in run order.
pub fn run_all(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    Ok((0..config.runs)
        .into_par_iter()
        .map(|r| run_one(config, r))
        .collect())
}

/// Executes all runs on a pool of `threads` workers (all cores when `None`).
pub fn run_all_with_threads(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<Vec<RunRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    pool.install(|| run_all(config))
}

/// Runs the experiment and writes its files into `config.output`.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<RunRecord>> {
    let dir = config
        .output
        .clone()
        .ok_or_else(|| Error::Parameter("the configuration names no output directory".into()))?;
    let records = run_all_with_threads(config, threads)?;
    write_outputs(&dir, config, &records)?;
    Ok(records)
}
