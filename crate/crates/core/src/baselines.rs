//! Comparison policies: single-timescale elimination, brute-force ESCB and
//! uniformly random play.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::env::{streams, Env, SeededRng};
use crate::error::{Error, Result};
use crate::model::{enumerate_perfect_matchings, MatchMode, Matching, Rank1Instance};
use crate::outcome::RegretRun;
use crate::pair_elim::{run_regret_with, Timescale};

/// Elimination with one window spanning the whole horizon for rows and columns.
pub fn rank1elim_run(inst: &Rank1Instance, horizon: u64, seed: u64) -> Result<RegretRun> {
    if !inst.is_bipartite() {
        return Err(Error::Shape("Rank1Elim needs a bipartite instance".into()));
    }
    run_regret_with(inst, horizon, seed, Timescale::Single)
}

/// Exploration schedule `scale · (ln t + loglog_weight · ln ln max(t, 3))`.
///
/// The default weight is four times the number of pairs in a matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscbSchedule {
    pub scale: f64,
    pub loglog_weight: f64,
}

impl EscbSchedule {
    pub fn standard(n_pairs: usize) -> Self {
        EscbSchedule {
            scale: 1.0,
            loglog_weight: 4.0 * n_pairs as f64,
        }
    }

    pub fn f(&self, t: u64) -> f64 {
        let t = t as f64;
        self.scale * (t.ln() + self.loglog_weight * t.max(3.0).ln().ln())
    }
}

/// Empirical statistics of every unordered pair, stored in a dense `n × n` table.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStats {
    n: usize,
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl PairStats {
    pub fn new(n: usize) -> Self {
        PairStats {
            n,
            counts: vec![0; n * n],
            sums: vec![0.0; n * n],
        }
    }

    fn cell(&self, i: usize, j: usize) -> usize {
        i.min(j) * self.n + i.max(j)
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[self.cell(i, j)]
    }

    pub fn sum(&self, i: usize, j: usize) -> f64 {
        self.sums[self.cell(i, j)]
    }

    pub fn push(&mut self, i: usize, j: usize, x: f64) {
        let c = self.cell(i, j);
        self.counts[c] += 1;
        self.sums[c] += x;
    }
}

/// Optimistic index of a matching; infinite while any of its pairs is unplayed.
pub fn escb_index(stats: &PairStats, m: &Matching, f: f64) -> f64 {
    let mut mean = 0.0;
    let mut inv = 0.0;
    for &(i, j) in &m.pairs {
        let k = stats.count(i, j);
        if k == 0 {
            return f64::INFINITY;
        }
        mean += stats.sum(i, j) / k as f64;
        inv += 1.0 / k as f64;
    }
    mean + (0.5 * f.max(0.0) * inv).sqrt()
}

/// Brute-force ESCB over all perfect matchings of a monopartite instance.
pub struct Escb {
    matchings: Vec<Matching>,
    stats: PairStats,
    schedule: EscbSchedule,
    obs: Vec<f64>,
}

impl Escb {
    pub fn new(env: &Env, schedule: EscbSchedule) -> Result<Self> {
        if env.is_bipartite() || env.mode() != MatchMode::Maximal {
            return Err(Error::Shape(
                "ESCB plays perfect matchings on a monopartite instance".into(),
            ));
        }
        let n = env.n_items();
        Ok(Escb {
            matchings: enumerate_perfect_matchings(n)?,
            stats: PairStats::new(n),
            schedule,
            obs: Vec::with_capacity(n / 2),
        })
    }

    pub fn matchings(&self) -> &[Matching] {
        &self.matchings
    }

    pub fn stats(&self) -> &PairStats {
        &self.stats
    }

    pub fn schedule(&self) -> &EscbSchedule {
        &self.schedule
    }

    /// Position in [`Escb::matchings`] of the matching played at one-based step `t`.
    pub fn choose(&self, t: u64) -> usize {
        let f = self.schedule.f(t);
        let mut best = (0, f64::NEG_INFINITY);
        for (k, m) in self.matchings.iter().enumerate() {
            let v = escb_index(&self.stats, m, f);
            if v > best.1 {
                best = (k, v);
                if v == f64::INFINITY {
                    break;
                }
            }
        }
        best.0
    }

    pub fn step(&mut self, env: &mut Env) {
        let k = self.choose(env.t() + 1);
        let pairs = &self.matchings[k].pairs;
        env.play(pairs, &mut self.obs);
        for (&(i, j), &x) in pairs.iter().zip(&self.obs) {
            self.stats.push(i, j, x);
        }
    }
}

pub fn escb_run_with(
    inst: &Rank1Instance,
    horizon: u64,
    seed: u64,
    schedule: EscbSchedule,
) -> Result<RegretRun> {
    let mut env = Env::new(inst, MatchMode::Maximal, seed)?;
    let mut alg = Escb::new(&env, schedule)?;
    while env.t() < horizon {
        alg.step(&mut env);
    }
    Ok(RegretRun {
        ledger: env.into_ledger(),
    })
}

pub fn escb_run(inst: &Rank1Instance, horizon: u64, seed: u64) -> Result<RegretRun> {
    escb_run_with(
        inst,
        horizon,
        seed,
        EscbSchedule::standard(inst.n_rows() / 2),
    )
}

/// Plays a uniformly random pair or perfect matching at every step.
pub fn uniform_random_run(
    inst: &Rank1Instance,
    horizon: u64,
    mode: MatchMode,
    seed: u64,
) -> Result<RegretRun> {
    let mut env = Env::new(inst, mode, seed)?;
    let mut rng = SeededRng::new(seed, streams::POLICY).rng();
    let (n, m) = (env.n_rows(), env.n_cols());
    let bipartite = env.is_bipartite();
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..m).collect();
    let mut pairs = Vec::with_capacity(n);
    let mut obs = Vec::with_capacity(n);
    while env.t() < horizon {
        match (mode, bipartite) {
            (MatchMode::Minimal, true) => {
                env.pull(rng.gen_range(0..n), rng.gen_range(0..m));
            }
            (MatchMode::Minimal, false) => {
                let i = rng.gen_range(0..n);
                let j = (i + rng.gen_range(1..n)) % n;
                env.pull(i, j);
            }
            (MatchMode::Maximal, true) => {
                cols.shuffle(&mut rng);
                pairs.clear();
                pairs.extend(rows.iter().copied().zip(cols.iter().copied()));
                env.play(&pairs, &mut obs);
            }
            (MatchMode::Maximal, false) => {
                rows.shuffle(&mut rng);
                pairs.clear();
                pairs.extend(rows.chunks(2).map(|c| (c[0], c[1])));
                env.play(&pairs, &mut obs);
            }
        }
    }
    Ok(RegretRun {
        ledger: env.into_ledger(),
    })
}
