//! Elimination-style confidence intervals refreshed on a geometric schedule.
//!
//! A tracker at level `l` has seen at least `k_l = ⌈4^{l+1} ln β_l⌉`
//! observations and reports `mean ± √(ln β_l / k_l)`. Its bounds only move
//! when the count reaches the next threshold.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{Error, Result};

/// Number of levels precomputed by a [`Schedule`]; later thresholds saturate.
pub const MAX_LEVELS: usize = 40;

/// How the confidence parameter `β_l` depends on the level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BetaPolicy {
    /// `β_l = h` at every level.
    Horizon { h: f64 },
    /// `β_l = π √((rows+1)(cols+1) h / 3) · l` for bipartite pair exploration.
    PairExplore {
        nrows: usize,
        ncols: usize,
        inv_delta: f64,
    },
    /// `β_l = π √(2n(n−1) h / 3) · l` for pair exploration over `n` items.
    MonoExplore { n_items: usize, inv_delta: f64 },
    /// `β_l = π √(n / (3δ)) · l` for matching identification over `n` items.
    MatchingId { n_items: usize, delta: f64 },
}

impl BetaPolicy {
    /// `β_l`, with the level clamped to at least 1 in the level-scaled modes.
    pub fn beta(&self, level: usize) -> f64 {
        let l = level.max(1) as f64;
        match *self {
            BetaPolicy::Horizon { h } => h,
            BetaPolicy::PairExplore {
                nrows,
                ncols,
                inv_delta,
            } => PI * ((nrows + 1) as f64 * (ncols + 1) as f64 * inv_delta / 3.0).sqrt() * l,
            BetaPolicy::MonoExplore { n_items, inv_delta } => {
                let n = n_items as f64;
                PI * (2.0 * n * (n - 1.0) * inv_delta / 3.0).sqrt() * l
            }
            BetaPolicy::MatchingId { n_items, delta } => {
                PI * (n_items as f64 / (3.0 * delta)).sqrt() * l
            }
        }
    }

    /// A horizon policy floored at `e`, so that `ln β ≥ 1`.
    pub fn horizon_at_least_e(h: f64) -> Self {
        BetaPolicy::Horizon { h: h.max(E) }
    }
}

/// `⌈4^{l+1} ln β_l⌉`, saturating at `u64::MAX`.
pub fn level_threshold(level: usize, policy: &BetaPolicy) -> Result<u64> {
    let beta = policy.beta(level);
    if beta.is_nan() || beta <= 1.0 || !beta.is_finite() {
        return Err(Error::InvalidPolicy(format!(
            "beta_{level} = {beta} must exceed 1"
        )));
    }
    let raw = 4f64.powi(level as i32 + 1) * beta.ln();
    Ok(if raw >= u64::MAX as f64 {
        u64::MAX
    } else {
        raw.ceil() as u64
    })
}

/// Precomputed thresholds and radii for one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    policy: BetaPolicy,
    thresholds: Vec<u64>,
    radii: Vec<f64>,
}

impl Schedule {
    pub fn new(policy: BetaPolicy) -> Result<Self> {
        let mut thresholds = Vec::with_capacity(MAX_LEVELS);
        let mut radii = Vec::with_capacity(MAX_LEVELS);
        for l in 0..MAX_LEVELS {
            let k = level_threshold(l, &policy)?;
            thresholds.push(k);
            radii.push((policy.beta(l).ln() / k as f64).sqrt());
        }
        Ok(Schedule {
            policy,
            thresholds,
            radii,
        })
    }

    pub fn policy(&self) -> &BetaPolicy {
        &self.policy
    }

    /// `k_l`, or `u64::MAX` past the precomputed range.
    #[inline]
    pub fn threshold(&self, level: usize) -> u64 {
        self.thresholds.get(level).copied().unwrap_or(u64::MAX)
    }

    #[inline]
    pub fn radius(&self, level: usize) -> f64 {
        self.radii[level]
    }

    /// Largest level whose threshold does not exceed `count`.
    pub fn level_for(&self, count: u64) -> Option<usize> {
        self.thresholds.iter().rposition(|&k| k <= count)
    }
}

/// Running statistic with schedule-driven bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tracker {
    pub count: u64,
    pub sum: f64,
    /// `None` until the first refresh.
    pub level: Option<usize>,
    pub lower: f64,
    pub upper: f64,
    /// Set by a refresh; cleared by the owner.
    pub fresh: bool,
    next: u64,
}

impl Tracker {
    pub fn new(schedule: &Schedule) -> Self {
        Tracker {
            count: 0,
            sum: 0.0,
            level: None,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            fresh: false,
            next: schedule.threshold(0),
        }
    }

    /// Adds one observation; returns true when the bounds were refreshed.
    #[inline]
    pub fn push(&mut self, x: f64, schedule: &Schedule) -> bool {
        self.count += 1;
        self.sum += x;
        if self.count >= self.next {
            self.refresh(schedule);
            true
        } else {
            false
        }
    }

    /// Adds a batch of observations; returns true when the bounds were refreshed.
    pub fn ingest(&mut self, xs: &[f64], schedule: &Schedule) -> bool {
        self.count += xs.len() as u64;
        self.sum += xs.iter().sum::<f64>();
        if self.count >= self.next {
            self.refresh(schedule);
            true
        } else {
            false
        }
    }

    /// Adds a pre-summed block of `count` observations.
    pub fn ingest_block(&mut self, sum: f64, count: u64, schedule: &Schedule) -> bool {
        self.count += count;
        self.sum += sum;
        if self.count >= self.next {
            self.refresh(schedule);
            true
        } else {
            false
        }
    }

    /// Replaces the statistic and recomputes bounds for the new count.
    pub fn reset_to(&mut self, sum: f64, count: u64, schedule: &Schedule) {
        *self = Tracker::new(schedule);
        self.sum = sum;
        self.count = count;
        if count >= self.next {
            self.refresh(schedule);
        }
    }

    /// Sets the running totals directly. A smaller count than before
    /// restarts the level schedule; otherwise bounds refresh only when a
    /// threshold is crossed. Returns true on refresh.
    pub fn sync(&mut self, sum: f64, count: u64, schedule: &Schedule) -> bool {
        if count < self.count {
            self.reset_to(sum, count, schedule);
            return self.level.is_some();
        }
        self.sum = sum;
        self.count = count;
        if self.count >= self.next {
            self.refresh(schedule);
            true
        } else {
            false
        }
    }

    fn refresh(&mut self, schedule: &Schedule) {
        let level = schedule
            .level_for(self.count)
            .expect("count reached at least the first threshold");
        let mean = self.sum / self.count as f64;
        let r = schedule.radius(level);
        self.level = Some(level);
        self.lower = mean - r;
        self.upper = mean + r;
        self.fresh = true;
        self.next = schedule.threshold(level + 1);
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// True when `self` is provably below `other`.
    #[inline]
    pub fn below(&self, other: &Tracker) -> bool {
        self.upper < other.lower
    }
}

/// Outcome of comparing two intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Separation {
    AAboveB,
    BAboveA,
    Undecided,
}

pub fn separated(a: &Tracker, b: &Tracker) -> Separation {
    if b.upper < a.lower {
        Separation::AAboveB
    } else if a.upper < b.lower {
        Separation::BAboveA
    } else {
        Separation::Undecided
    }
}
