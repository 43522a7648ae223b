use serde::{Deserialize, Serialize};

use super::instance::{rank_order, InstanceKind, Rank1Instance};
use crate::error::{Error, Result};

/// Largest item count accepted by exhaustive matching enumeration.
pub const MAX_ENUMERATED_ITEMS: usize = 12;

/// A pair action (one pair per step) or a full perfect matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Minimal,
    Maximal,
}

/// Vertex-disjoint pairs. In bipartite problems each pair is `(row, col)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Matching { pairs }
    }

    pub fn single(i: usize, j: usize) -> Self {
        Matching {
            pairs: vec![(i, j)],
        }
    }

    /// Pairs with smaller id first, sorted; for comparing monopartite matchings.
    pub fn canonical(&self) -> Matching {
        let mut pairs: Vec<_> = self
            .pairs
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        Matching { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks index ranges and vertex-disjointness for the given instance.
    pub fn check(&self, inst: &Rank1Instance) -> Result<()> {
        let (nr, nc) = (inst.n_rows(), inst.n_cols());
        let mut used_r = vec![false; nr];
        let mut used_c = vec![false; nc];
        for &(i, j) in &self.pairs {
            if i >= nr {
                return Err(Error::Index { index: i, len: nr });
            }
            if j >= nc {
                return Err(Error::Index { index: j, len: nc });
            }
            match inst.kind {
                InstanceKind::Bipartite => {
                    if used_r[i] || used_c[j] {
                        return Err(Error::Parameter("pairs share an item".into()));
                    }
                    used_r[i] = true;
                    used_c[j] = true;
                }
                InstanceKind::Monopartite => {
                    if i == j || used_r[i] || used_r[j] {
                        return Err(Error::Parameter("pairs share an item".into()));
                    }
                    used_r[i] = true;
                    used_r[j] = true;
                }
            }
        }
        Ok(())
    }

    /// True when every one of `n_items` items is covered exactly once.
    pub fn is_perfect_on(&self, n_items: usize) -> bool {
        let mut seen = vec![false; n_items];
        for &(a, b) in &self.pairs {
            if a == b || a >= n_items || b >= n_items || seen[a] || seen[b] {
                return false;
            }
            seen[a] = true;
            seen[b] = true;
        }
        seen.iter().all(|&s| s)
    }
}

/// Sum of expected rewards of the pairs in `m`.
pub fn expected_reward(inst: &Rank1Instance, m: &Matching) -> Result<f64> {
    m.check(inst)?;
    Ok(m.pairs.iter().map(|&(i, j)| inst.mean(i, j)).sum())
}

/// The reward-maximising action: top pair, or sorted-adjacent pairing.
pub fn optimal_matching(inst: &Rank1Instance, mode: MatchMode) -> Result<Matching> {
    let rows = rank_order(&inst.u);
    match (inst.kind, mode) {
        (InstanceKind::Bipartite, MatchMode::Minimal) => {
            let cols = rank_order(inst.col_params());
            Ok(Matching::single(rows[0], cols[0]))
        }
        (InstanceKind::Bipartite, MatchMode::Maximal) => {
            if inst.n_rows() != inst.n_cols() {
                return Err(Error::Shape(
                    "maximal bipartite matching needs as many rows as columns".into(),
                ));
            }
            let cols = rank_order(inst.col_params());
            Ok(Matching::new(rows.into_iter().zip(cols).collect()))
        }
        (InstanceKind::Monopartite, MatchMode::Minimal) => Ok(Matching::single(rows[0], rows[1])),
        (InstanceKind::Monopartite, MatchMode::Maximal) => Ok(Matching::new(
            rows.chunks(2).map(|c| (c[0], c[1])).collect(),
        )),
    }
}

/// Every perfect matching of `n_items` items, each pair as `(low, high)`.
pub fn enumerate_perfect_matchings(n_items: usize) -> Result<Vec<Matching>> {
    if !n_items.is_multiple_of(2) || n_items > MAX_ENUMERATED_ITEMS {
        return Err(Error::Refused(format!(
            "enumeration needs an even item count at most {MAX_ENUMERATED_ITEMS}, got {n_items}"
        )));
    }
    let mut out = Vec::new();
    let mut used = vec![false; n_items];
    let mut current = Vec::with_capacity(n_items / 2);
    fill(&mut used, &mut current, &mut out);
    Ok(out)
}

fn fill(used: &mut [bool], current: &mut Vec<(usize, usize)>, out: &mut Vec<Matching>) {
    let Some(first) = used.iter().position(|&u| !u) else {
        out.push(Matching::new(current.clone()));
        return;
    };
    used[first] = true;
    for partner in first + 1..used.len() {
        if used[partner] {
            continue;
        }
        used[partner] = true;
        current.push((first, partner));
        fill(used, current, out);
        current.pop();
        used[partner] = false;
    }
    used[first] = false;
}
