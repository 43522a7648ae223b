//! Bipartite pair selection by elimination on two timescales.
//!
//! Rows keep their statistics for the whole run. Column statistics live in
//! windows of length `2^{2^w}` and are discarded when a window ends, so a
//! column eliminated early can come back. Each sweep plays every surviving
//! row against one column, then every surviving column against one row.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::confbound::{BetaPolicy, Schedule, Tracker};
use crate::env::{streams, Env, SeededRng};
use crate::error::{Error, Result};
use crate::model::{optimal_matching, rank_order, MatchMode, Matching, Rank1Instance};
use crate::outcome::{ExploreRun, RegretRun, DEFAULT_STEP_BUDGET};

/// Confidence trackers for the items of one side against each partner on the other side.
#[derive(Debug, Clone)]
pub struct TrackerGrid {
    n: usize,
    m: usize,
    entries: Vec<Tracker>,
    aggregate: Vec<Tracker>,
    schedule: Schedule,
    dirty: bool,
}

impl TrackerGrid {
    pub fn new(n: usize, m: usize, schedule: Schedule) -> Self {
        let blank = Tracker::new(&schedule);
        TrackerGrid {
            n,
            m,
            entries: vec![blank; n * m],
            aggregate: vec![blank; n],
            schedule,
            dirty: false,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn entry(&self, item: usize, partner: usize) -> &Tracker {
        &self.entries[item * self.m + partner]
    }

    pub fn aggregate(&self, item: usize) -> &Tracker {
        &self.aggregate[item]
    }

    #[inline]
    pub fn push(&mut self, item: usize, partner: usize, x: f64) {
        let s = &self.schedule;
        let a = self.entries[item * self.m + partner].push(x, s);
        let b = self.aggregate[item].push(x, s);
        self.dirty |= a | b;
    }

    /// True when `winner` is provably above `loser` on some shared coordinate.
    pub fn dominates(&self, winner: usize, loser: usize) -> bool {
        if self.aggregate[loser].below(&self.aggregate[winner]) {
            return true;
        }
        let (w, l) = (winner * self.m, loser * self.m);
        (0..self.m).any(|k| self.entries[l + k].below(&self.entries[w + k]))
    }

    /// Each item mapped to the highest-label item dominating it, or to itself.
    pub fn domination_map(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .rev()
                    .find(|&j| j != i && self.dominates(j, i))
                    .unwrap_or(i)
            })
            .collect()
    }

    fn take_dirty(&mut self) -> bool {
        std::mem::take(&mut self.dirty)
    }
}

/// Follows a domination map until it reaches an item that maps to itself.
pub fn representatives(map: &[usize]) -> Vec<usize> {
    (0..map.len())
        .map(|start| {
            let mut x = start;
            for _ in 0..map.len() {
                if map[x] == x {
                    break;
                }
                x = map[x];
            }
            x
        })
        .collect()
}

fn distinct_sorted(reps: &[usize]) -> Vec<usize> {
    let mut v = reps.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Whether the algorithm minimises regret up to a horizon or stops at a confident answer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairMode {
    Regret { horizon: u64 },
    Explore { delta: f64 },
}

/// Column bookkeeping variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timescale {
    /// Column statistics restart in doubly-exponential windows.
    Windowed,
    /// One window covering the whole horizon (the Rank1Elim baseline).
    Single,
}

/// Running state of one bipartite elimination run.
pub struct PairElim {
    mode: PairMode,
    timescale: Timescale,
    rows: TrackerGrid,
    cols: TrackerGrid,
    row_rep: Vec<usize>,
    col_rep: Vec<usize>,
    active_rows: Vec<usize>,
    active_cols: Vec<usize>,
    window: u32,
    window_start: u64,
    window_len: u64,
    in_window: u64,
    column_phase: bool,
    scale: f64,
    rng: ChaCha8Rng,
}

const MAX_WINDOW_EXPONENT: u32 = 62;

pub(crate) fn window_length(w: u32) -> u64 {
    let e = 1u64.checked_shl(w).unwrap_or(u64::MAX);
    if e > MAX_WINDOW_EXPONENT as u64 {
        1 << MAX_WINDOW_EXPONENT
    } else {
        1 << e
    }
}

/// Index of the window holding the `samples`-th in-window sample when windows
/// have lengths `2, 4, 16, 256, …` back to back.
pub fn window_index_after(samples: u64) -> u32 {
    let mut w = 0;
    let mut end = window_length(0);
    while samples > end {
        w += 1;
        end = end.saturating_add(window_length(w));
    }
    w
}

impl PairElim {
    pub fn new(env: &Env, mode: PairMode, timescale: Timescale, seed: u64) -> Result<Self> {
        if !env.is_bipartite() {
            return Err(Error::Shape(
                "pair elimination needs a bipartite instance".into(),
            ));
        }
        let (n, m) = (env.n_rows(), env.n_cols());
        let row_policy = match mode {
            PairMode::Regret { horizon } => BetaPolicy::horizon_at_least_e(horizon as f64),
            PairMode::Explore { delta } => {
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(Error::Parameter(format!(
                        "delta must be in (0,1), got {delta}"
                    )));
                }
                if timescale == Timescale::Single {
                    return Err(Error::Parameter(
                        "the single-timescale variant only runs in regret mode".into(),
                    ));
                }
                BetaPolicy::PairExplore {
                    nrows: n,
                    ncols: m,
                    inv_delta: 1.0 / delta,
                }
            }
        };
        let mut me = PairElim {
            mode,
            timescale,
            rows: TrackerGrid::new(n, m, Schedule::new(row_policy)?),
            cols: TrackerGrid::new(m, n, Schedule::new(row_policy)?),
            row_rep: (0..n).collect(),
            col_rep: (0..m).collect(),
            active_rows: (0..n).collect(),
            active_cols: (0..m).collect(),
            window: 0,
            window_start: 0,
            window_len: u64::MAX,
            in_window: 0,
            column_phase: false,
            scale: env.tracker_scale(),
            rng: SeededRng::new(seed, streams::POLICY).rng(),
        };
        me.open_window(0)?;
        Ok(me)
    }

    fn open_window(&mut self, now: u64) -> Result<()> {
        self.window_start = now;
        self.in_window = 0;
        let policy = match (self.timescale, self.mode) {
            (Timescale::Single, PairMode::Regret { horizon }) => {
                self.window_len = u64::MAX;
                BetaPolicy::horizon_at_least_e(horizon as f64)
            }
            (Timescale::Windowed, PairMode::Regret { horizon }) => {
                self.window_len = window_length(self.window);
                let effective = self.window_len.min(horizon.saturating_sub(now));
                BetaPolicy::horizon_at_least_e(effective as f64)
            }
            (Timescale::Windowed, PairMode::Explore { .. }) => {
                self.window_len = window_length(self.window);
                BetaPolicy::horizon_at_least_e(self.window_len as f64)
            }
            (Timescale::Single, PairMode::Explore { .. }) => unreachable!("rejected in new"),
        };
        let (m, n) = (self.cols.n, self.cols.m);
        self.cols = TrackerGrid::new(m, n, Schedule::new(policy)?);
        self.refresh_cols();
        Ok(())
    }

    fn enter_column_phase(&mut self) -> Result<()> {
        let PairMode::Explore { delta } = self.mode else {
            return Ok(());
        };
        self.column_phase = true;
        self.in_window = 0;
        self.window_len = u64::MAX;
        let policy = BetaPolicy::PairExplore {
            nrows: self.rows.n,
            ncols: self.cols.n,
            inv_delta: 1.0 / delta,
        };
        let (m, n) = (self.cols.n, self.cols.m);
        self.cols = TrackerGrid::new(m, n, Schedule::new(policy)?);
        self.refresh_cols();
        Ok(())
    }

    fn refresh_rows(&mut self) {
        self.row_rep = representatives(&self.rows.domination_map());
        self.active_rows = distinct_sorted(&self.row_rep);
    }

    fn refresh_cols(&mut self) {
        self.col_rep = representatives(&self.cols.domination_map());
        self.active_cols = distinct_sorted(&self.col_rep);
    }

    pub fn active_rows(&self) -> &[usize] {
        &self.active_rows
    }

    pub fn active_cols(&self) -> &[usize] {
        &self.active_cols
    }

    pub fn row_map(&self) -> Vec<usize> {
        self.rows.domination_map()
    }

    pub fn col_map(&self) -> Vec<usize> {
        self.cols.domination_map()
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn in_column_phase(&self) -> bool {
        self.column_phase
    }

    /// The confident answer, once the column phase has a single survivor.
    pub fn recommend(&self) -> Option<(usize, usize)> {
        match (
            self.column_phase,
            self.active_rows.as_slice(),
            self.active_cols.as_slice(),
        ) {
            (true, [i], [j]) => Some((*i, *j)),
            _ => None,
        }
    }

    /// One sweep; plays stop early once `env` reaches `limit` steps.
    pub fn sweep(&mut self, env: &mut Env, limit: u64) -> Result<()> {
        let j = self.col_rep[self.rng.gen_range(0..self.cols.n)];
        for &i in &self.active_rows {
            if env.t() >= limit {
                break;
            }
            let x = env.pull(i, j) / self.scale;
            self.rows.push(i, j, x);
            self.in_window += 1;
        }
        let i = self.row_rep[self.rng.gen_range(0..self.rows.n)];
        for &j in &self.active_cols {
            if env.t() >= limit {
                break;
            }
            let x = env.pull(i, j) / self.scale;
            self.cols.push(j, i, x);
            self.in_window += 1;
        }
        if self.rows.take_dirty() {
            self.refresh_rows();
        }
        if self.cols.take_dirty() {
            self.refresh_cols();
        }
        if self.timescale == Timescale::Windowed
            && !self.column_phase
            && self.in_window > self.window_len
        {
            self.window += 1;
            self.open_window(env.t())?;
        }
        if matches!(self.mode, PairMode::Explore { .. })
            && !self.column_phase
            && self.active_rows.len() == 1
        {
            self.enter_column_phase()?;
        }
        Ok(())
    }
}

/// Regret trajectory of the windowed algorithm over `horizon` pair plays.
pub fn run_regret(inst: &Rank1Instance, horizon: u64, seed: u64) -> Result<RegretRun> {
    run_regret_with(inst, horizon, seed, Timescale::Windowed)
}

pub(crate) fn run_regret_with(
    inst: &Rank1Instance,
    horizon: u64,
    seed: u64,
    timescale: Timescale,
) -> Result<RegretRun> {
    let mut env = Env::new(inst, MatchMode::Minimal, seed)?;
    regret_on_env(&mut env, horizon, seed, timescale)?;
    Ok(RegretRun {
        ledger: env.into_ledger(),
    })
}

/// Runs on a caller-owned environment, leaving play counts inspectable.
pub fn regret_on_env(env: &mut Env, horizon: u64, seed: u64, timescale: Timescale) -> Result<()> {
    let mut alg = PairElim::new(env, PairMode::Regret { horizon }, timescale, seed)?;
    while env.t() < horizon {
        alg.sweep(env, horizon)?;
    }
    Ok(())
}

fn unique_top(values: &[f64]) -> bool {
    let order = rank_order(values);
    order.len() < 2 || values[order[0]] > values[order[1]]
}

/// Pure exploration: plays pairs until the best pair is identified at confidence `1 − delta`.
pub fn run_explore(inst: &Rank1Instance, delta: f64, seed: u64) -> Result<ExploreRun> {
    if !inst.is_bipartite() {
        return Err(Error::Shape(
            "pair elimination needs a bipartite instance".into(),
        ));
    }
    if !unique_top(&inst.u) || !unique_top(inst.col_params()) {
        return Err(Error::Refused("the best pair is not unique".into()));
    }
    let mut env = Env::new(inst, MatchMode::Minimal, seed)?;
    let mut alg = PairElim::new(&env, PairMode::Explore { delta }, Timescale::Windowed, seed)?;
    loop {
        if let Some((i, j)) = alg.recommend() {
            let recommendation = Matching::single(i, j);
            let correct = recommendation == optimal_matching(env.truth(), MatchMode::Minimal)?;
            return Ok(ExploreRun {
                recommendation,
                tau: env.t(),
                correct,
            });
        }
        if env.t() >= DEFAULT_STEP_BUDGET {
            return Err(Error::Refused(
                "exploration exceeded its step budget".into(),
            ));
        }
        alg.sweep(&mut env, u64::MAX)?;
    }
}
