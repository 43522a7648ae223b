//! Best-matching identification when every action is a perfect matching.
//!
//! Each iteration plays a full round-robin over the unranked items together
//! with the items that could still be among the best `|unranked|`; the
//! remaining items are paired off in a fixed way. Only plays of an unranked
//! item against a candidate-best item are counted.
//!
//! Two unranked items `i` and `j` are compared through a pair of trackers:
//! one holds the plays of `i` against candidate-best partners other than
//! `j`, the other the plays of `j` against candidate-best partners other
//! than `i`. Both trackers see the same partners in the same iterations, so
//! their means differ by a common positive factor times `u_i - u_j`.

use crate::confbound::{BetaPolicy, Schedule, Tracker};
use crate::env::Env;
use crate::error::{Error, Result};
use crate::model::{
    compute_gaps, optimal_matching, round_robin_schedule, MatchMode, Matching, Rank1Instance,
    TIE_TOLERANCE,
};
use crate::outcome::{ExploreRun, DEFAULT_STEP_BUDGET};
use crate::ranking::Ranking;

/// Items of `0..n` that could still occupy one of the top
/// `ranking.unranked().len()` slots, given the comparison `below`.
pub fn candidate_best(
    ranking: &Ranking,
    n: usize,
    below: impl Fn(usize, usize) -> bool,
) -> Vec<usize> {
    let s = ranking.unranked().len();
    (0..n)
        .filter(|&i| ranking.known_above_by(i, &below) < s)
        .collect()
}

/// Sorted union of the two sets, padded with the best outside item when odd.
pub fn tournament_items(
    ranking: &Ranking,
    n: usize,
    below: impl Fn(usize, usize) -> bool,
    best: &[usize],
) -> Vec<usize> {
    let mut inside = vec![false; n];
    for &i in best.iter().chain(ranking.unranked()) {
        inside[i] = true;
    }
    if inside.iter().filter(|&&b| b).count() % 2 == 1 {
        let pad = (0..n)
            .filter(|&i| !inside[i])
            .min_by_key(|&i| (ranking.known_above_by(i, &below), i))
            .expect("an odd subset of an even set has a complement");
        inside[pad] = true;
    }
    (0..n).filter(|&i| inside[i]).collect()
}

/// Lowest-label adjacent pairing of the items outside `items`.
pub fn filler_pairs(n: usize, items: &[usize]) -> Vec<(usize, usize)> {
    let mut inside = vec![false; n];
    for &i in items {
        inside[i] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !inside[i]).collect();
    rest.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

/// Identification result with in-run diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingIdRun {
    pub run: ExploreRun,
    pub iterations: u64,
    /// Iterations where the candidate set exceeded twice the unranked set.
    pub oversized_candidates: u64,
    /// Iterations where some unranked item had fewer than 4/9 counted plays per matching.
    pub thin_sampling: u64,
    pub min_counted_fraction: f64,
}

pub fn run(inst: &Rank1Instance, delta: f64, seed: u64) -> Result<ExploreRun> {
    run_detailed(inst, delta, seed).map(|r| r.run)
}

pub fn run_detailed(inst: &Rank1Instance, delta: f64, seed: u64) -> Result<MatchingIdRun> {
    if inst.is_bipartite() {
        return Err(Error::Shape(
            "matching identification needs a monopartite instance".into(),
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!(
            "delta must be in (0,1), got {delta}"
        )));
    }
    if compute_gaps(inst)
        .delta_min
        .is_some_and(|d| d <= TIE_TOLERANCE)
    {
        return Err(Error::Refused("the best matching is not unique".into()));
    }
    let mut env = Env::new(inst, MatchMode::Maximal, seed)?;
    let n = env.n_items();
    let schedule = Schedule::new(BetaPolicy::MatchingId { n_items: n, delta })?;
    let scale = env.tracker_scale();
    let all: Vec<usize> = (0..n).collect();
    let mut ranking = Ranking::new(&all, n);
    // versus[i * n + j]: plays of `i` against candidate-best partners other than `j`.
    let mut versus = vec![Tracker::new(&schedule); n * n];
    let below =
        |versus: &[Tracker], i: usize, j: usize| versus[i * n + j].below(&versus[j * n + i]);
    let mut counted = vec![0u64; n];
    let mut diag = MatchingIdRun {
        run: ExploreRun {
            recommendation: Matching::new(Vec::new()),
            tau: 0,
            correct: false,
        },
        iterations: 0,
        oversized_candidates: 0,
        thin_sampling: 0,
        min_counted_fraction: f64::INFINITY,
    };
    let mut is_best = vec![false; n];
    let mut out = Vec::with_capacity(n / 2);

    while !ranking.is_done() {
        if env.t() >= DEFAULT_STEP_BUDGET {
            return Err(Error::Refused(
                "exploration exceeded its step budget".into(),
            ));
        }
        let best = candidate_best(&ranking, n, |i, j| below(&versus, i, j));
        if best.len() > 2 * ranking.unranked().len() {
            diag.oversized_candidates += 1;
        }
        is_best.iter_mut().for_each(|b| *b = false);
        best.iter().for_each(|&i| is_best[i] = true);
        let unranked = ranking.unranked().to_vec();

        let items = tournament_items(&ranking, n, |i, j| below(&versus, i, j), &best);
        let filler = filler_pairs(n, &items);
        let mut refreshed = false;
        for round in round_robin_schedule(&items) {
            let mut pairs = round.pairs.clone();
            pairs.extend_from_slice(&filler);
            env.play(&pairs, &mut out);
            for (&(a, b), &x) in round.pairs.iter().zip(&out) {
                let x = x / scale;
                for (me, partner) in [(a, b), (b, a)] {
                    if !is_best[partner] || ranking.slot(me).is_some() {
                        continue;
                    }
                    counted[me] += 1;
                    for &other in unranked.iter().filter(|&&o| o != me && o != partner) {
                        refreshed |= versus[me * n + other].push(x, &schedule);
                    }
                }
            }
        }
        diag.iterations += 1;
        let t = env.t() as f64;
        let thinnest = unranked
            .iter()
            .map(|&i| counted[i] as f64 / t)
            .fold(f64::INFINITY, f64::min);
        diag.min_counted_fraction = diag.min_counted_fraction.min(thinnest);
        if thinnest < 4.0 / 9.0 {
            diag.thin_sampling += 1;
        }
        if refreshed {
            ranking.update_by(|i, j| below(&versus, i, j));
        }
    }

    let recommendation = Matching::new(ranking.pairs()).canonical();
    let correct = recommendation == optimal_matching(env.truth(), MatchMode::Maximal)?.canonical();
    diag.run = ExploreRun {
        recommendation,
        tau: env.t(),
        correct,
    };
    Ok(diag)
}
