//! Pair selection among items of a single population.
//!
//! Every item is both a row and a column of a `2N × 2N` table. Rows keep
//! their statistics for the whole run, columns restart in windows, and the
//! algorithm tracks which ordered pairs are still worth sampling instead of
//! which rows and columns. [`pair_select`] chains the top-pair search with a
//! ranking phase to recover the best perfect matching.

use crate::confbound::{BetaPolicy, Schedule, Tracker};
use crate::env::Env;
use crate::error::{Error, Result};
use crate::model::{
    compute_gaps, optimal_matching, rank_order, MatchMode, Matching, Rank1Instance,
};
use crate::outcome::{ExploreRun, RegretRun, DEFAULT_STEP_BUDGET};
use crate::pair_elim::{window_length, PairMode};
use crate::ranking::Ranking;

/// Per-item statistics against each partner, plus pairwise aggregates.
///
/// `aggregate(i, j)` pools the observations of item `i` against partners
/// other than `i` and `j`, counting only plays whose partner was also being
/// sampled with `j` in the same pass. The two aggregates of a pair therefore
/// cover the same partners with the same weights.
#[derive(Debug, Clone)]
pub struct PairTable {
    n: usize,
    entries: Vec<Tracker>,
    aggregates: Vec<Tracker>,
    schedule: Schedule,
    dirty: bool,
}

impl PairTable {
    pub fn new(n: usize, schedule: Schedule) -> Self {
        let blank = Tracker::new(&schedule);
        PairTable {
            n,
            entries: vec![blank; n * n],
            aggregates: vec![blank; n * n],
            schedule,
            dirty: false,
        }
    }

    pub fn entry(&self, item: usize, partner: usize) -> &Tracker {
        &self.entries[item * self.n + partner]
    }

    pub fn aggregate(&self, item: usize, excluded: usize) -> &Tracker {
        &self.aggregates[item * self.n + excluded]
    }

    /// Records `x` for `item` against `partner`; `peer_active(j)` says whether
    /// item `j` is sampled against the same partner in this pass.
    fn push(&mut self, item: usize, partner: usize, x: f64, peer_active: impl Fn(usize) -> bool) {
        let s = &self.schedule;
        let n = self.n;
        let mut refreshed = self.entries[item * n + partner].push(x, s);
        for j in 0..n {
            if j != item && j != partner && peer_active(j) {
                refreshed |= self.aggregates[item * n + j].push(x, s);
            }
        }
        self.dirty |= refreshed;
    }

    /// True when `winner` is provably above `loser`.
    pub fn dominates(&self, winner: usize, loser: usize) -> bool {
        if self
            .aggregate(loser, winner)
            .below(self.aggregate(winner, loser))
        {
            return true;
        }
        (0..self.n)
            .filter(|&k| k != winner && k != loser)
            .any(|k| self.entry(loser, k).below(self.entry(winner, k)))
    }

    /// Items proven above `item`, up to two of them.
    fn dominators(&self, item: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| j != item && self.dominates(j, item))
            .take(2)
            .collect()
    }

    fn take_dirty(&mut self) -> bool {
        std::mem::take(&mut self.dirty)
    }
}

/// Square boolean matrix of ordered pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    n: usize,
    on: Vec<bool>,
}

impl PairSet {
    /// All ordered pairs of distinct items.
    pub fn full(n: usize) -> Self {
        let mut on = vec![true; n * n];
        for i in 0..n {
            on[i * n + i] = false;
        }
        PairSet { n, on }
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.on[i * self.n + j]
    }

    fn remove(&mut self, i: usize, j: usize) {
        self.on[i * self.n + j] = false;
    }

    pub fn len(&self) -> usize {
        self.on.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.on.iter().any(|&b| b)
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n * self.n)
            .filter(|&c| self.on[c])
            .map(|c| (c / self.n, c % self.n))
            .collect()
    }

    fn intersect(&self, other: &PairSet) -> PairSet {
        PairSet {
            n: self.n,
            on: self
                .on
                .iter()
                .zip(&other.on)
                .map(|(a, b)| *a && *b)
                .collect(),
        }
    }

    /// The two items of a set reduced to one pair in both orientations.
    pub fn single_pair(&self) -> Option<(usize, usize)> {
        match self.pairs().as_slice() {
            [(a, b), (c, d)] if (a, b) == (d, c) => Some((*a, *b)),
            _ => None,
        }
    }
}

/// Removal rules driven by row statistics: an item beaten by two others
/// leaves entirely, an item beaten by one keeps only its pair with it.
pub fn apply_row_rules(rows: &PairTable, set: &mut PairSet) {
    for i in 0..rows.n {
        let d = rows.dominators(i);
        let keep = match d.as_slice() {
            [] => continue,
            [j] => Some(*j),
            _ => None,
        };
        for l in (0..rows.n).filter(|&l| Some(l) != keep) {
            set.remove(i, l);
            set.remove(l, i);
        }
    }
}

/// Removal rules driven by column statistics, touching only pairs with the item in second place.
pub fn apply_column_rules(cols: &PairTable, set: &mut PairSet) {
    for i in 0..cols.n {
        let d = cols.dominators(i);
        let keep = match d.as_slice() {
            [] => continue,
            [j] => Some(*j),
            _ => None,
        };
        for l in (0..cols.n).filter(|&l| Some(l) != keep) {
            set.remove(l, i);
        }
    }
}

/// Running state of one monopartite elimination run.
pub struct PairElimMono {
    mode: PairMode,
    n: usize,
    rows: PairTable,
    cols: PairTable,
    row_set: PairSet,
    col_set: PairSet,
    active: PairSet,
    window: u32,
    window_len: u64,
    in_window: u64,
    scale: f64,
}

impl PairElimMono {
    pub fn new(env: &Env, mode: PairMode) -> Result<Self> {
        if env.is_bipartite() {
            return Err(Error::Shape(
                "monopartite pair elimination needs a monopartite instance".into(),
            ));
        }
        let n = env.n_items();
        let row_policy = match mode {
            PairMode::Regret { horizon } => BetaPolicy::horizon_at_least_e(horizon as f64),
            PairMode::Explore { delta } => {
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(Error::Parameter(format!(
                        "delta must be in (0,1), got {delta}"
                    )));
                }
                BetaPolicy::MonoExplore {
                    n_items: n,
                    inv_delta: 1.0 / delta,
                }
            }
        };
        let schedule = Schedule::new(row_policy)?;
        let mut me = PairElimMono {
            mode,
            n,
            rows: PairTable::new(n, schedule.clone()),
            cols: PairTable::new(n, schedule),
            row_set: PairSet::full(n),
            col_set: PairSet::full(n),
            active: PairSet::full(n),
            window: 0,
            window_len: 0,
            in_window: 0,
            scale: env.tracker_scale(),
        };
        me.open_window(0)?;
        Ok(me)
    }

    fn open_window(&mut self, now: u64) -> Result<()> {
        self.window_len = window_length(self.window);
        let h = match self.mode {
            PairMode::Regret { horizon } => self.window_len.min(horizon.saturating_sub(now)),
            PairMode::Explore { .. } => self.window_len,
        };
        self.cols = PairTable::new(
            self.n,
            Schedule::new(BetaPolicy::horizon_at_least_e(h as f64))?,
        );
        self.col_set = PairSet::full(self.n);
        self.in_window = 0;
        self.active = self.row_set.intersect(&self.col_set);
        Ok(())
    }

    /// Ordered pairs that survive the persistent row rules.
    pub fn row_set(&self) -> &PairSet {
        &self.row_set
    }

    /// Ordered pairs sampled in the next pass.
    pub fn active(&self) -> &PairSet {
        &self.active
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn recommend(&self) -> Option<(usize, usize)> {
        self.row_set.single_pair()
    }

    /// Items ordered by their pooled row mean, used when every pair got eliminated.
    fn fallback_pair(&self) -> (usize, usize) {
        let means: Vec<f64> = (0..self.n)
            .map(|i| {
                let (s, c) = (0..self.n).fold((0.0, 0u64), |(s, c), k| {
                    let t = self.rows.entry(i, k);
                    (s + t.sum, c + t.count)
                });
                if c == 0 {
                    0.0
                } else {
                    s / c as f64
                }
            })
            .collect();
        let order = rank_order(&means);
        (order[0], order[1])
    }

    /// One pass over the active pairs, two plays each; stops early at `limit` steps.
    pub fn sweep(&mut self, env: &mut Env, limit: u64) -> Result<()> {
        if self.row_set.is_empty() {
            let (a, b) = self.fallback_pair();
            let stop = limit.min(env.t() + 2);
            while env.t() < stop {
                env.pull(a, b);
            }
            return Ok(());
        }
        if self.active.is_empty() {
            self.window += 1;
            self.open_window(env.t())?;
        }
        let active = self.active.clone();
        for (i, j) in active.pairs() {
            if env.t() >= limit {
                break;
            }
            let x = env.pull(i, j) / self.scale;
            self.rows.push(i, j, x, |peer| active.contains(peer, j));
            if env.t() >= limit {
                break;
            }
            let y = env.pull(i, j) / self.scale;
            self.cols.push(j, i, y, |peer| active.contains(i, peer));
            self.in_window += 2;
        }
        let rows_changed = self.rows.take_dirty();
        let cols_changed = self.cols.take_dirty();
        if rows_changed {
            apply_row_rules(&self.rows, &mut self.row_set);
        }
        if cols_changed {
            apply_column_rules(&self.cols, &mut self.col_set);
        }
        if self.in_window > self.window_len {
            self.window += 1;
            self.open_window(env.t())?;
        } else if rows_changed || cols_changed {
            self.active = self.row_set.intersect(&self.col_set);
        }
        Ok(())
    }
}

/// Regret trajectory over `horizon` pair plays.
pub fn run_regret(inst: &Rank1Instance, horizon: u64, seed: u64) -> Result<RegretRun> {
    let mut env = Env::new(inst, MatchMode::Minimal, seed)?;
    let mut alg = PairElimMono::new(&env, PairMode::Regret { horizon })?;
    while env.t() < horizon {
        alg.sweep(&mut env, horizon)?;
    }
    Ok(RegretRun {
        ledger: env.into_ledger(),
    })
}

fn check_monopartite(inst: &Rank1Instance) -> Result<()> {
    if inst.is_bipartite() {
        return Err(Error::Shape("expected a monopartite instance".into()));
    }
    Ok(())
}

fn explore_top_pair(env: &mut Env, delta: f64) -> Result<(usize, usize)> {
    let mut alg = PairElimMono::new(env, PairMode::Explore { delta })?;
    loop {
        if let Some(pair) = alg.recommend() {
            return Ok(pair);
        }
        if alg.row_set().is_empty() {
            return Ok(alg.fallback_pair());
        }
        if env.t() >= DEFAULT_STEP_BUDGET {
            return Err(Error::Refused(
                "exploration exceeded its step budget".into(),
            ));
        }
        alg.sweep(env, u64::MAX)?;
    }
}

/// Pure exploration of the best pair at confidence `1 − delta`.
pub fn run_explore(inst: &Rank1Instance, delta: f64, seed: u64) -> Result<ExploreRun> {
    check_monopartite(inst)?;
    let order = rank_order(&inst.u);
    if order.len() > 2 && inst.u[order[1]] <= inst.u[order[2]] {
        return Err(Error::Refused("the best pair is not unique".into()));
    }
    let mut env = Env::new(inst, MatchMode::Minimal, seed)?;
    let (a, b) = explore_top_pair(&mut env, delta)?;
    let recommendation = Matching::single(a.min(b), a.max(b));
    let correct = recommendation == optimal_matching(env.truth(), MatchMode::Minimal)?.canonical();
    Ok(ExploreRun {
        recommendation,
        tau: env.t(),
        correct,
    })
}

/// Outcome of the two-phase matching identifier with per-phase detail.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSelectRun {
    pub run: ExploreRun,
    pub first_phase_steps: u64,
    /// Second-phase plays involving each item, indexed by the caller's item ids.
    pub second_phase_plays: Vec<u64>,
}

/// Best perfect matching identified by pair plays at confidence `1 − delta`.
pub fn pair_select(inst: &Rank1Instance, delta: f64, seed: u64) -> Result<PairSelectRun> {
    check_monopartite(inst)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!(
            "delta must be in (0,1), got {delta}"
        )));
    }
    let gaps = compute_gaps(inst);
    let order = rank_order(&inst.u);
    if order.iter().skip(2).any(|&i| gaps.delta_pairsel[i] <= 0.0) {
        return Err(Error::Refused(
            "the ranking needed for the best matching is not unique".into(),
        ));
    }
    let mut env = Env::new(inst, MatchMode::Minimal, seed)?;
    let n = env.n_items();
    let (a, b) = explore_top_pair(&mut env, delta / 2.0)?;
    let first_phase_steps = env.t();

    let rest: Vec<usize> = (0..n).filter(|&i| i != a && i != b).collect();
    let schedule = Schedule::new(BetaPolicy::MonoExplore {
        n_items: n,
        inv_delta: 2.0 / delta,
    })?;
    let mut bounds = vec![Tracker::new(&schedule); n];
    let mut plays = vec![0u64; n];
    let mut ranking = Ranking::new(&rest, n);
    let scale = env.tracker_scale();
    while !ranking.is_done() {
        if env.t() >= DEFAULT_STEP_BUDGET {
            return Err(Error::Refused(
                "exploration exceeded its step budget".into(),
            ));
        }
        let mut refreshed = false;
        for &i in &ranking.unranked().to_vec() {
            refreshed |= bounds[i].push(env.pull(a, i) / scale, &schedule);
            refreshed |= bounds[i].push(env.pull(b, i) / scale, &schedule);
            plays[i] += 2;
        }
        if refreshed {
            ranking.update(&bounds);
        }
    }

    let mut pairs = vec![(a, b)];
    pairs.extend(ranking.pairs());
    let recommendation = Matching::new(pairs).canonical();
    let correct = recommendation == optimal_matching(env.truth(), MatchMode::Maximal)?.canonical();
    let tau = env.t();
    Ok(PairSelectRun {
        run: ExploreRun {
            recommendation,
            tau,
            correct,
        },
        first_phase_steps,
        second_phase_plays: plays,
    })
}
