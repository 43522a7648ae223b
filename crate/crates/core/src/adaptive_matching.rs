//! Regret minimisation with perfect-matching actions by recursive cluster splitting.
//!
//! Items start in one cluster. Each cluster cycles through a list of
//! matching schemes so that, over one period, any two of its items meet
//! every other item equally often. Once the confidence intervals of the
//! items in a cluster separate, the cluster is cut in two at the gap.
//!
//! A cluster covering rank positions `start..=end` (one-based) needs a
//! partner in the previous cluster when `start` is even and in the next
//! cluster when `end` is odd. Consecutive clusters linked this way form a
//! chain; clusters with no links are isolated.

use num_integer::lcm;
use serde::Serialize;

use crate::confbound::{BetaPolicy, Schedule, Tracker};
use crate::env::Env;
use crate::error::{Error, Result};
use crate::model::{rank_order, round_robin_schedule, MatchMode, Rank1Instance, TIE_TOLERANCE};
use crate::outcome::RegretRun;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Isolated,
    ChainFirst,
    ChainIntermediate,
    ChainLast,
}

impl Role {
    /// Role of a cluster occupying one-based rank positions `start..=end`.
    pub fn from_span(start: usize, end: usize) -> Role {
        match (start.is_multiple_of(2), end % 2 == 1) {
            (false, false) => Role::Isolated,
            (false, true) => Role::ChainFirst,
            (true, true) => Role::ChainIntermediate,
            (true, false) => Role::ChainLast,
        }
    }

    pub fn links_next(self) -> bool {
        matches!(self, Role::ChainFirst | Role::ChainIntermediate)
    }

    pub fn links_prev(self) -> bool {
        matches!(self, Role::ChainIntermediate | Role::ChainLast)
    }
}

/// Pairs to play inside a cluster, plus the items sent to the neighbouring clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchingScheme {
    pub internal_pairs: Vec<(usize, usize)>,
    pub link_next: Option<usize>,
    pub link_prev: Option<usize>,
}

fn tournament_with_virtual(cluster: &[usize], to_next: bool) -> Vec<MatchingScheme> {
    let slots: Vec<Option<usize>> = cluster.iter().copied().map(Some).chain([None]).collect();
    round_robin_schedule(&slots)
        .into_iter()
        .map(|round| {
            let mut scheme = MatchingScheme {
                internal_pairs: Vec::new(),
                link_next: None,
                link_prev: None,
            };
            for pair in round.pairs {
                match pair {
                    (Some(a), Some(b)) => scheme.internal_pairs.push((a, b)),
                    (Some(a), None) | (None, Some(a)) => {
                        if to_next {
                            scheme.link_next = Some(a);
                        } else {
                            scheme.link_prev = Some(a);
                        }
                    }
                    (None, None) => unreachable!("one virtual item"),
                }
            }
            scheme
        })
        .collect()
}

/// The scheme list of a cluster with the given role.
///
/// Sizes are `|S|−1` for isolated clusters, `|S|` at either end of a chain
/// and `(|S|−1)|S|` inside a chain. An intermediate cluster always spans an
/// even number of positions, and odd ones are rejected.
pub fn build_scheme_list(cluster: &[usize], role: Role) -> Result<Vec<MatchingScheme>> {
    if cluster.is_empty() {
        return Err(Error::Shape("empty cluster".into()));
    }
    match role {
        Role::Isolated => {
            if cluster.len() % 2 == 1 {
                return Err(Error::Shape(
                    "an isolated cluster must have an even size".into(),
                ));
            }
            Ok(round_robin_schedule(cluster)
                .into_iter()
                .map(|round| MatchingScheme {
                    internal_pairs: round.pairs,
                    link_next: None,
                    link_prev: None,
                })
                .collect())
        }
        Role::ChainFirst | Role::ChainLast => {
            if cluster.len().is_multiple_of(2) {
                return Err(Error::Shape("a chain end must have an odd size".into()));
            }
            Ok(tournament_with_virtual(cluster, role == Role::ChainFirst))
        }
        Role::ChainIntermediate => {
            if cluster.len() % 2 == 1 {
                return Err(Error::Shape(
                    "an intermediate chain cluster must have an even size".into(),
                ));
            }
            let mut list = Vec::with_capacity(cluster.len() * (cluster.len() - 1));
            for round in round_robin_schedule(cluster) {
                for (k, &(a, b)) in round.pairs.iter().enumerate() {
                    let rest: Vec<(usize, usize)> = round
                        .pairs
                        .iter()
                        .enumerate()
                        .filter(|&(m, _)| m != k)
                        .map(|(_, &p)| p)
                        .collect();
                    for (next, prev) in [(a, b), (b, a)] {
                        list.push(MatchingScheme {
                            internal_pairs: rest.clone(),
                            link_next: Some(next),
                            link_prev: Some(prev),
                        });
                    }
                }
            }
            Ok(list)
        }
    }
}

/// How many consecutive steps each scheme is repeated, for the cluster at
/// one-based `position` in a chain with the given cluster sizes.
pub fn sampling_rate(chain_sizes: &[usize], position: usize) -> u64 {
    if position % 2 == 1 {
        return 1;
    }
    let before = chain_sizes[position - 2] as u64;
    let after = chain_sizes.get(position).copied().unwrap_or(1) as u64;
    lcm(before, after)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub items: Vec<usize>,
    pub role: Role,
    pub chain: usize,
    /// One-based position within the chain; 1 for isolated clusters.
    pub chain_position: usize,
    pub rate: u64,
    pub schemes: Vec<MatchingScheme>,
    /// Step at which the current scheme cycle started.
    pub t_init: u64,
}

impl Cluster {
    /// Steps after which every scheme has been played `rate` times.
    pub fn period(&self) -> u64 {
        self.rate * self.schemes.len() as u64
    }

    pub fn scheme_at(&self, t: u64) -> &MatchingScheme {
        let e = t - self.t_init;
        &self.schemes[((e / self.rate) % self.schemes.len() as u64) as usize]
    }
}

/// Ordered clusters, best first, covering all items.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterPartition {
    pub clusters: Vec<Cluster>,
    #[serde(skip)]
    cluster_of: Vec<usize>,
}

impl ClusterPartition {
    /// Builds roles, chains, rates and schemes; `t_init[k]` is the cycle start of cluster `k`.
    pub fn new(groups: Vec<Vec<usize>>, t_init: &[u64]) -> Result<Self> {
        let n: usize = groups.iter().map(Vec::len).sum();
        let mut cluster_of = vec![usize::MAX; n];
        for (k, g) in groups.iter().enumerate() {
            for &i in g {
                if i >= n || cluster_of[i] != usize::MAX {
                    return Err(Error::Shape("clusters must partition the items".into()));
                }
                cluster_of[i] = k;
            }
        }
        let mut roles = Vec::with_capacity(groups.len());
        let mut start = 1;
        for g in &groups {
            roles.push(Role::from_span(start, start + g.len() - 1));
            start += g.len();
        }
        // Chains: maximal runs joined by next links.
        let mut chain_of = vec![0; groups.len()];
        let mut position = vec![1; groups.len()];
        let mut chain = 0;
        for k in 0..groups.len() {
            if k > 0 && roles[k - 1].links_next() {
                position[k] = position[k - 1] + 1;
            } else if k > 0 {
                chain += 1;
            }
            chain_of[k] = chain;
        }
        let mut clusters = Vec::with_capacity(groups.len());
        for (k, g) in groups.into_iter().enumerate() {
            let schemes = build_scheme_list(&g, roles[k])?;
            clusters.push(Cluster {
                items: g,
                role: roles[k],
                chain: chain_of[k],
                chain_position: position[k],
                rate: 1,
                schemes,
                t_init: t_init[k],
            });
        }
        for k in 0..clusters.len() {
            let sizes: Vec<usize> = clusters
                .iter()
                .filter(|c| c.chain == clusters[k].chain)
                .map(|c| c.items.len())
                .collect();
            if clusters[k].role != Role::Isolated {
                clusters[k].rate = sampling_rate(&sizes, clusters[k].chain_position);
            }
        }
        Ok(ClusterPartition {
            clusters,
            cluster_of,
        })
    }

    /// Everything in one isolated cluster.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![(0..n).collect()], &[0])
    }

    pub fn n_items(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn cluster_of(&self, item: usize) -> usize {
        self.cluster_of[item]
    }

    /// Item groups, best first.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        self.clusters.iter().map(|c| c.items.clone()).collect()
    }

    /// The perfect matching played at step `t`.
    pub fn matching_at(&self, t: u64) -> Result<Vec<(usize, usize)>> {
        let mut pairs = Vec::with_capacity(self.n_items() / 2);
        let mut pending: Option<usize> = None;
        for c in &self.clusters {
            let s = c.scheme_at(t);
            match (pending.take(), s.link_prev) {
                (Some(a), Some(b)) => pairs.push((a, b)),
                (None, None) => {}
                _ => {
                    return Err(Error::Bug(
                        "unmatched link between adjacent clusters".into(),
                    ))
                }
            }
            pairs.extend_from_slice(&s.internal_pairs);
            pending = s.link_next;
        }
        if pending.is_some() {
            return Err(Error::Bug("dangling link after the last cluster".into()));
        }
        Ok(pairs)
    }

    /// Least common multiple of the cluster periods.
    pub fn full_period(&self) -> u64 {
        self.clusters.iter().map(Cluster::period).fold(1, lcm)
    }
}

/// Which flavour of the splitting algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Only accepts instances whose sorted parameters come in equal pairs.
    Simple,
    Full,
}

/// True when the sorted parameters come in equal consecutive pairs.
pub fn has_equal_pairs(u: &[f64]) -> bool {
    let order = rank_order(u);
    order.len().is_multiple_of(2)
        && order
            .chunks(2)
            .all(|c| (u[c[0]] - u[c[1]]).abs() <= TIE_TOLERANCE)
}

/// Regret run with the splitting history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveRun {
    pub run: RegretRun,
    pub splits: u64,
    /// Splits that produced at least one odd-sized cluster.
    pub odd_splits: u64,
    /// Steps whose statistics were discarded at splits.
    pub dropped_steps: u64,
    pub max_period: u64,
    /// Final clusters in label coordinates of the shuffled environment.
    pub clusters: Vec<Vec<usize>>,
}

/// Running state of the cluster-splitting learner.
pub struct AdaptiveMatching {
    n: usize,
    partition: ClusterPartition,
    sums: Vec<f64>,
    counts: Vec<u64>,
    epoch_sums: Vec<f64>,
    epoch_counts: Vec<u64>,
    trackers: Vec<Tracker>,
    schedule: Schedule,
    scale: f64,
    splits: u64,
    odd_splits: u64,
    dropped_steps: u64,
    max_period: u64,
    obs: Vec<f64>,
}

impl AdaptiveMatching {
    pub fn new(env: &Env, horizon: u64) -> Result<Self> {
        if env.is_bipartite() || env.mode() != MatchMode::Maximal {
            return Err(Error::Shape(
                "cluster splitting plays perfect matchings on a monopartite instance".into(),
            ));
        }
        let n = env.n_items();
        let schedule = Schedule::new(BetaPolicy::horizon_at_least_e(horizon as f64))?;
        let partition = ClusterPartition::single(n)?;
        let max_period = partition.clusters[0].period();
        Ok(AdaptiveMatching {
            n,
            partition,
            sums: vec![0.0; n * n],
            counts: vec![0; n * n],
            epoch_sums: vec![0.0; n * n],
            epoch_counts: vec![0; n * n],
            trackers: vec![Tracker::new(&schedule); n],
            schedule,
            scale: env.tracker_scale(),
            splits: 0,
            odd_splits: 0,
            dropped_steps: 0,
            max_period,
            obs: Vec::with_capacity(n / 2),
        })
    }

    pub fn partition(&self) -> &ClusterPartition {
        &self.partition
    }

    pub fn tracker(&self, item: usize) -> &Tracker {
        &self.trackers[item]
    }

    /// Plays one matching and updates clusters.
    pub fn step(&mut self, env: &mut Env) -> Result<()> {
        let t = env.t();
        let pairs = self.partition.matching_at(t)?;
        check_perfect(&pairs, self.n)?;
        env.play(&pairs, &mut self.obs);
        let n = self.n;
        for (&(a, b), &x) in pairs.iter().zip(&self.obs) {
            let x = x / self.scale;
            for c in [a * n + b, b * n + a] {
                self.epoch_sums[c] += x;
                self.epoch_counts[c] += 1;
            }
        }
        let now = t + 1;
        for k in 0..self.partition.clusters.len() {
            let c = &self.partition.clusters[k];
            if (now - c.t_init).is_multiple_of(c.period()) {
                let items = c.items.clone();
                self.flush(&items);
            }
        }
        self.split_fresh_clusters(now)
    }

    fn flush(&mut self, items: &[usize]) {
        let n = self.n;
        for &i in items {
            for c in i * n..(i + 1) * n {
                self.sums[c] += self.epoch_sums[c];
                self.counts[c] += self.epoch_counts[c];
                self.epoch_sums[c] = 0.0;
                self.epoch_counts[c] = 0;
            }
        }
        self.sync_trackers(items);
    }

    /// Recomputes each item's total against its own and better clusters.
    fn sync_trackers(&mut self, items: &[usize]) {
        let n = self.n;
        for &i in items {
            let k = self.partition.cluster_of(i);
            let (mut sum, mut count) = (0.0, 0);
            for j in 0..n {
                if self.partition.cluster_of(j) <= k {
                    sum += self.sums[i * n + j];
                    count += self.counts[i * n + j];
                }
            }
            self.trackers[i].sync(sum, count, &self.schedule);
        }
    }

    fn split_fresh_clusters(&mut self, now: u64) -> Result<()> {
        let mut k = 0;
        while k < self.partition.clusters.len() {
            let items = &self.partition.clusters[k].items;
            if !items.iter().any(|&i| self.trackers[i].fresh) {
                k += 1;
                continue;
            }
            for &i in items {
                self.trackers[i].fresh = false;
            }
            let pieces = self.cut_points(k);
            if pieces.len() > 1 {
                self.apply_split(k, pieces, now)?;
                // Re-examine from the start since indices shifted and trackers were re-synced.
                k = 0;
            } else {
                k += 1;
            }
        }
        Ok(())
    }

    /// The cluster's items ordered by upper bound, cut wherever an upper bound
    /// falls below the previous item's lower bound.
    fn cut_points(&self, k: usize) -> Vec<Vec<usize>> {
        let mut items = self.partition.clusters[k].items.clone();
        let q = &self.trackers;
        items.sort_by(|&a, &b| q[b].upper.total_cmp(&q[a].upper).then(a.cmp(&b)));
        let mut pieces = vec![vec![items[0]]];
        for w in items.windows(2) {
            if q[w[1]].upper < q[w[0]].lower {
                pieces.push(Vec::new());
            }
            pieces.last_mut().expect("nonempty").push(w[1]);
        }
        pieces
    }

    fn apply_split(&mut self, k: usize, pieces: Vec<Vec<usize>>, now: u64) -> Result<()> {
        let old = &self.partition.clusters;
        let chain = old[k].chain;
        let mut affected = vec![false; self.n];
        let mut dropped = 0;
        for c in old.iter().filter(|c| c.chain == chain) {
            dropped = dropped.max((now - c.t_init) % c.period());
            for &i in &c.items {
                affected[i] = true;
            }
        }
        self.dropped_steps += dropped;
        self.splits += 1;
        if pieces.iter().any(|p| p.len() % 2 == 1) {
            self.odd_splits += 1;
        }

        let mut groups = Vec::with_capacity(old.len() + pieces.len() - 1);
        let mut starts = Vec::with_capacity(groups.capacity());
        for (m, c) in old.iter().enumerate() {
            if m == k {
                for p in &pieces {
                    groups.push(p.clone());
                    starts.push(now);
                }
            } else {
                groups.push(c.items.clone());
                starts.push(if affected[c.items[0]] { now } else { c.t_init });
            }
        }
        self.partition = ClusterPartition::new(groups, &starts)?;
        self.max_period = self
            .partition
            .clusters
            .iter()
            .map(Cluster::period)
            .fold(self.max_period, u64::max);

        let n = self.n;
        let touched: Vec<usize> = (0..n).filter(|&i| affected[i]).collect();
        for &i in &touched {
            for c in i * n..(i + 1) * n {
                self.epoch_sums[c] = 0.0;
                self.epoch_counts[c] = 0;
            }
        }
        self.sync_trackers(&touched);
        Ok(())
    }

    fn into_report(self, env: Env) -> AdaptiveRun {
        AdaptiveRun {
            run: RegretRun {
                ledger: env.into_ledger(),
            },
            splits: self.splits,
            odd_splits: self.odd_splits,
            dropped_steps: self.dropped_steps,
            max_period: self.max_period,
            clusters: self.partition.groups(),
        }
    }
}

fn check_perfect(pairs: &[(usize, usize)], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &(a, b) in pairs {
        if a == b || seen[a] || seen[b] {
            return Err(Error::Bug(format!("not a perfect matching: {pairs:?}")));
        }
        seen[a] = true;
        seen[b] = true;
    }
    if seen.iter().all(|&s| s) {
        Ok(())
    } else {
        Err(Error::Bug(format!("not a perfect matching: {pairs:?}")))
    }
}

/// Regret over `horizon` matchings with the splitting history.
pub fn run_detailed(
    inst: &Rank1Instance,
    horizon: u64,
    variant: Variant,
    seed: u64,
) -> Result<AdaptiveRun> {
    if inst.is_bipartite() {
        return Err(Error::Shape(
            "cluster splitting needs a monopartite instance".into(),
        ));
    }
    if variant == Variant::Simple && !has_equal_pairs(&inst.u) {
        return Err(Error::Refused(
            "the simple variant needs parameters in equal consecutive pairs".into(),
        ));
    }
    let mut env = Env::new(inst, MatchMode::Maximal, seed)?;
    let mut alg = AdaptiveMatching::new(&env, horizon)?;
    while env.t() < horizon {
        alg.step(&mut env)?;
    }
    Ok(alg.into_report(env))
}

pub fn run_regret(
    inst: &Rank1Instance,
    horizon: u64,
    variant: Variant,
    seed: u64,
) -> Result<RegretRun> {
    run_detailed(inst, horizon, variant, seed).map(|r| r.run)
}
