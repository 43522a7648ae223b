//! Simulated rewards with semi-bandit feedback and expected-regret accounting.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    expected_reward, optimal_matching, MatchMode, Matching, Rank1Instance, RewardDist,
};

/// Stream ids used to split one run seed into independent generators.
pub mod streams {
    pub const GENERATOR: u64 = 0;
    pub const NOISE: u64 = 1;
    pub const POLICY: u64 = 2;
    pub const LABELS: u64 = 3;
    pub const GENERATOR_COLUMNS: u64 = 4;
}

/// A `(seed, stream)` pair naming one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededRng {
    pub seed: u64,
    pub stream: u64,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        SeededRng { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Observed rewards for each pair of a played action.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Feedback {
    pub observations: Vec<((usize, usize), f64)>,
}

#[inline]
fn draw(dist: RewardDist, mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    match dist {
        RewardDist::Bernoulli => {
            if rng.gen::<f64>() < mean {
                1.0
            } else {
                0.0
            }
        }
        RewardDist::Gaussian { sigma } => {
            if sigma == 0.0 {
                mean
            } else {
                let z: f64 = rng.sample(StandardNormal);
                mean + sigma * z
            }
        }
    }
}

/// One independent noisy observation per pair of `m`.
pub fn sample_feedback(
    inst: &Rank1Instance,
    m: &Matching,
    rng: &mut ChaCha8Rng,
) -> Result<Feedback> {
    m.check(inst)?;
    let observations = m
        .pairs
        .iter()
        .map(|&(i, j)| ((i, j), draw(inst.dist, inst.mean(i, j), rng)))
        .collect();
    Ok(Feedback { observations })
}

/// Step after `t` on the checkpoint grid: every step up to 100, then ×1.05 rounded up.
pub fn next_checkpoint(t: u64) -> u64 {
    if t < 100 {
        t + 1
    } else {
        (21 * t).div_ceil(20)
    }
}

/// Checkpoints up to and including `horizon`.
pub fn checkpoint_grid(horizon: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut t = 1;
    while t < horizon {
        grid.push(t);
        t = next_checkpoint(t);
    }
    if horizon > 0 {
        grid.push(horizon);
    }
    grid
}

/// Cumulative expected regret with log-spaced checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretLedger {
    pub t: u64,
    pub cum_regret: f64,
    pub checkpoints: Vec<(u64, f64)>,
    #[serde(skip)]
    next: u64,
}

impl Default for RegretLedger {
    fn default() -> Self {
        RegretLedger {
            t: 0,
            cum_regret: 0.0,
            checkpoints: Vec::new(),
            next: 1,
        }
    }
}

impl RegretLedger {
    #[inline]
    pub fn record(&mut self, gap: f64) {
        self.t += 1;
        self.cum_regret += gap.max(0.0);
        if self.t == self.next {
            self.checkpoints.push((self.t, self.cum_regret));
            self.next = next_checkpoint(self.t);
        }
    }

    /// Adds the final step as a checkpoint if it is not on the grid.
    pub fn finish(&mut self) {
        if self.t > 0 && self.checkpoints.last().map(|c| c.0) != Some(self.t) {
            self.checkpoints.push((self.t, self.cum_regret));
        }
    }
}

/// Accounts one step of `m` against the optimum for the given action mode.
pub fn record_step(
    ledger: &mut RegretLedger,
    inst: &Rank1Instance,
    m: &Matching,
    mode: MatchMode,
) -> Result<()> {
    let best = expected_reward(inst, &optimal_matching(inst, mode)?)?;
    ledger.record(best - expected_reward(inst, m)?);
    Ok(())
}

/// The environment one algorithm run interacts with.
///
/// Item labels seen by algorithms are a seeded permutation of the
/// instance's own indices; [`Env::truth`] exposes the instance in label
/// coordinates for scoring only.
pub struct Env {
    truth: Rank1Instance,
    mode: MatchMode,
    n_rows: usize,
    n_cols: usize,
    means: Vec<f64>,
    pair_regret: Vec<f64>,
    best_reward: f64,
    plays: Vec<u64>,
    rng: ChaCha8Rng,
    ledger: RegretLedger,
}

impl Env {
    /// Environment with labels shuffled by the run seed.
    pub fn new(inst: &Rank1Instance, mode: MatchMode, seed: u64) -> Result<Self> {
        let mut label_rng = SeededRng::new(seed, streams::LABELS).rng();
        let mut u = inst.u.clone();
        u.shuffle(&mut label_rng);
        let v = inst.v.clone().map(|mut v| {
            v.shuffle(&mut label_rng);
            v
        });
        let truth = Rank1Instance {
            u,
            v,
            ..inst.clone()
        };
        Self::build(truth, mode, seed)
    }

    /// Environment whose labels equal the instance indices.
    pub fn unshuffled(inst: &Rank1Instance, mode: MatchMode, seed: u64) -> Result<Self> {
        Self::build(inst.clone(), mode, seed)
    }

    fn build(truth: Rank1Instance, mode: MatchMode, seed: u64) -> Result<Self> {
        truth.validate()?;
        let (n_rows, n_cols) = (truth.n_rows(), truth.n_cols());
        let mut means = vec![0.0; n_rows * n_cols];
        for i in 0..n_rows {
            for j in 0..n_cols {
                means[i * n_cols + j] = truth.mean(i, j);
            }
        }
        let best_reward = match (truth.is_bipartite(), mode) {
            (false, MatchMode::Minimal) if n_rows < 2 => {
                return Err(Error::Shape("pair selection needs two items".into()))
            }
            _ => expected_reward(&truth, &optimal_matching(&truth, mode)?)?,
        };
        let pair_regret = means.iter().map(|&m| best_reward - m).collect();
        Ok(Env {
            truth,
            mode,
            n_rows,
            n_cols,
            means,
            pair_regret,
            best_reward,
            plays: vec![0; n_rows * n_cols],
            rng: SeededRng::new(seed, streams::NOISE).rng(),
            ledger: RegretLedger::default(),
        })
    }

    pub fn truth(&self) -> &Rank1Instance {
        &self.truth
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    pub fn is_bipartite(&self) -> bool {
        self.truth.is_bipartite()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of items in a monopartite problem.
    pub fn n_items(&self) -> usize {
        self.n_rows
    }

    /// Steps played so far.
    pub fn t(&self) -> u64 {
        self.ledger.t
    }

    /// Divisor that brings observations to the bounded-noise scale the
    /// confidence radii assume.
    pub fn tracker_scale(&self) -> f64 {
        match self.truth.dist {
            RewardDist::Bernoulli => 1.0,
            RewardDist::Gaussian { sigma } => (2.0 * sigma).max(1.0),
        }
    }

    pub fn ledger(&self) -> &RegretLedger {
        &self.ledger
    }

    pub fn into_ledger(mut self) -> RegretLedger {
        self.ledger.finish();
        self.ledger
    }

    #[inline]
    fn cell(&self, i: usize, j: usize) -> usize {
        if self.truth.is_bipartite() {
            i * self.n_cols + j
        } else {
            i.min(j) * self.n_cols + i.max(j)
        }
    }

    /// Number of times the pair has been played (unordered when monopartite).
    pub fn play_count(&self, i: usize, j: usize) -> u64 {
        self.plays[self.cell(i, j)]
    }

    /// Plays a single pair as one step of pair selection.
    #[inline]
    pub fn pull(&mut self, i: usize, j: usize) -> f64 {
        debug_assert!(self.mode == MatchMode::Minimal);
        debug_assert!(self.truth.is_bipartite() || i != j);
        let c = i * self.n_cols + j;
        let x = draw(self.truth.dist, self.means[c], &mut self.rng);
        self.ledger.record(self.pair_regret[c]);
        let cell = self.cell(i, j);
        self.plays[cell] += 1;
        x
    }

    /// Plays a perfect matching as one step; observations are written to `out` in pair order.
    pub fn play(&mut self, pairs: &[(usize, usize)], out: &mut Vec<f64>) {
        debug_assert!(self.mode == MatchMode::Maximal);
        out.clear();
        let mut reward = 0.0;
        for &(i, j) in pairs {
            let c = i * self.n_cols + j;
            reward += self.means[c];
            out.push(draw(self.truth.dist, self.means[c], &mut self.rng));
            let cell = self.cell(i, j);
            self.plays[cell] += 1;
        }
        self.ledger.record(self.best_reward - reward);
    }
}
