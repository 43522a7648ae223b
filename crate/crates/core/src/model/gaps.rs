use serde::Serialize;

use super::instance::{rank_order, InstanceKind, Rank1Instance};
use super::matching::{
    enumerate_perfect_matchings, expected_reward, optimal_matching, MatchMode, MAX_ENUMERATED_ITEMS,
};

/// Reward differences below this are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Gap quantities that drive the difficulty of an instance.
///
/// Per-item vectors are indexed by item label. The pair-gap index `k`
/// used by `mu_excl`, `s_index` and `h_index` is one-based and refers to
/// the ranked pair boundary between ranks `2k` and `2k+1`; `mu_excl[k-1]`
/// holds the value for `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSummary {
    pub delta_row: Vec<f64>,
    pub delta_col: Vec<f64>,
    pub delta_2i: Vec<f64>,
    pub delta_pairsel: Vec<f64>,
    pub delta_min: Option<f64>,
    pub delta_min_approximate: bool,
    pub gamma_min: Option<f64>,
    pub mu_excl: Vec<f64>,
    pub s_index: Option<usize>,
    pub h_index: Option<usize>,
}

fn gaps_to_max(values: &[f64]) -> Vec<f64> {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().map(|&x| top - x).collect()
}

/// Values sorted in decreasing order, addressed with one-based ranks.
struct Ranked(Vec<f64>);

impl Ranked {
    fn new(values: &[f64]) -> Self {
        Ranked(rank_order(values).into_iter().map(|i| values[i]).collect())
    }
    fn at(&self, rank: usize) -> f64 {
        self.0[rank - 1]
    }
    fn pair_gap(&self, k: usize) -> f64 {
        self.at(2 * k) - self.at(2 * k + 1)
    }
}

/// Per-rank gap used by the two-phase matching identifier, one-based rank.
///
/// The top two ranks are identified separately and carry no gap here.
pub(crate) fn pairsel_gap_by_rank(w: &[f64], rank: usize) -> f64 {
    let n = w.len();
    let at = |r: usize| w[r - 1];
    if rank <= 2 {
        0.0
    } else if rank % 2 == 1 {
        at(rank - 1) - at(rank)
    } else if rank < n {
        at(rank) - at(rank + 1)
    } else {
        (at(n - 2) - at(n)).abs()
    }
}

pub fn compute_gaps(inst: &Rank1Instance) -> GapSummary {
    if inst.kind == InstanceKind::Bipartite {
        return GapSummary {
            delta_row: gaps_to_max(&inst.u),
            delta_col: gaps_to_max(inst.col_params()),
            delta_2i: Vec::new(),
            delta_pairsel: Vec::new(),
            delta_min: None,
            delta_min_approximate: false,
            gamma_min: None,
            mu_excl: Vec::new(),
            s_index: None,
            h_index: None,
        };
    }

    let u = &inst.u;
    let n_items = u.len();
    let n_pairs = n_items / 2;
    let order = rank_order(u);
    let ranked = Ranked::new(u);

    let second = ranked.at(2.min(n_items));
    let delta_2i = u.iter().map(|&x| (second - x).max(0.0)).collect();

    let mut delta_pairsel = vec![0.0; n_items];
    for (pos, &item) in order.iter().enumerate() {
        delta_pairsel[item] = pairsel_gap_by_rank(&ranked.0, pos + 1);
    }

    let (delta_min, delta_min_approximate) = if n_items <= MAX_ENUMERATED_ITEMS {
        (Some(enumerated_delta_min(inst)), false)
    } else {
        let approx = (0..n_pairs - 1)
            .map(|p| {
                let [a, b, c, d] = [0, 1, 2, 3].map(|o| ranked.0[2 * p + o]);
                (a - d) * (b - c)
            })
            .fold(f64::INFINITY, f64::min);
        (Some(approx.max(0.0)), true)
    };

    let total: f64 = u.iter().sum();
    let mu_excl: Vec<f64> = (1..n_pairs)
        .map(|k| (total - ranked.at(2 * k) - ranked.at(2 * k + 1)) / n_items as f64)
        .collect();
    let weighted = |k: usize| mu_excl[k - 1] * ranked.pair_gap(k);
    let gamma_min = (1..n_pairs).map(weighted).reduce(f64::min);

    let argmin = |ks: &mut dyn Iterator<Item = usize>, key: &dyn Fn(usize) -> f64| {
        ks.fold(None, |best: Option<usize>, k| match best {
            Some(b) if key(b) <= key(k) => Some(b),
            _ => Some(k),
        })
    };
    let s_index = argmin(&mut (2..n_pairs), &|k| ranked.pair_gap(k));
    let h_index = s_index.and_then(|s| argmin(&mut (1..n_pairs).filter(|&k| k != s), &weighted));

    GapSummary {
        delta_row: gaps_to_max(u),
        delta_col: Vec::new(),
        delta_2i,
        delta_pairsel,
        delta_min,
        delta_min_approximate,
        gamma_min,
        mu_excl,
        s_index,
        h_index,
    }
}

fn enumerated_delta_min(inst: &Rank1Instance) -> f64 {
    let best = optimal_matching(inst, MatchMode::Maximal)
        .expect("monopartite maximal matching exists")
        .canonical();
    let best_reward = expected_reward(inst, &best).expect("valid matching");
    let mut gap = f64::INFINITY;
    for m in enumerate_perfect_matchings(inst.u.len()).expect("size checked") {
        if m == best {
            continue;
        }
        let d = best_reward - expected_reward(inst, &m).expect("valid matching");
        gap = gap.min(if d < TIE_TOLERANCE { 0.0 } else { d });
    }
    if gap.is_finite() {
        gap
    } else {
        // A single pair admits no alternative matching.
        0.0
    }
}
