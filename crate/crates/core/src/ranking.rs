//! Incremental ranking of items into slots from confidence intervals.
//!
//! Items still being sampled compete for the free slots and are compared
//! only with each other; once an item is ranked its slot is final. An item
//! is ranked when its interval is clear of every other unranked item, or
//! when it and one other item overlap only each other and together fill
//! the two slots of one pair (slots `2k` and `2k+1`).

use crate::confbound::Tracker;

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    items: Vec<usize>,
    slot: Vec<Option<usize>>,
    /// For items ranked as an unordered pair, the first slot of that pair.
    pair_slot: Vec<Option<usize>>,
    unranked: Vec<usize>,
}

impl Ranking {
    /// Ranks `items` into slots `0..items.len()`; labels index the bounds
    /// slice passed to later calls and must be below `n_labels`.
    pub fn new(items: &[usize], n_labels: usize) -> Self {
        let mut items = items.to_vec();
        items.sort_unstable();
        Ranking {
            unranked: items.clone(),
            items,
            slot: vec![None; n_labels],
            pair_slot: vec![None; n_labels],
        }
    }

    pub fn unranked(&self) -> &[usize] {
        &self.unranked
    }

    pub fn is_done(&self) -> bool {
        self.unranked.is_empty()
    }

    pub fn slot(&self, item: usize) -> Option<usize> {
        self.slot[item]
    }

    fn free_slots(&self) -> Vec<usize> {
        let mut taken = vec![false; self.items.len()];
        for &i in &self.items {
            if let Some(s) = self.slot[i] {
                taken[s] = true;
            }
        }
        (0..self.items.len()).filter(|&s| !taken[s]).collect()
    }

    fn above(&self, item: usize, below: &impl Fn(usize, usize) -> bool) -> usize {
        self.unranked
            .iter()
            .filter(|&&j| j != item && below(item, j))
            .count()
    }

    fn overlapping(&self, item: usize, below: &impl Fn(usize, usize) -> bool) -> Vec<usize> {
        self.unranked
            .iter()
            .copied()
            .filter(|&j| j != item && !below(item, j) && !below(j, item))
            .collect()
    }

    /// Number of slots certainly occupied by items better than `item`.
    pub fn known_above(&self, item: usize, bounds: &[Tracker]) -> usize {
        self.known_above_by(item, |i, j| bounds[i].below(&bounds[j]))
    }

    /// [`Ranking::known_above`] with `below(i, j)` telling whether `i` is
    /// certainly worse than `j`.
    pub fn known_above_by(&self, item: usize, below: impl Fn(usize, usize) -> bool) -> usize {
        if let Some(s) = self.pair_slot[item].or(self.slot[item]) {
            return s;
        }
        self.free_slots()[self.above(item, &below)]
    }

    /// Ranks every item that the current bounds pin down; returns how many were ranked.
    pub fn update(&mut self, bounds: &[Tracker]) -> usize {
        self.update_by(|i, j| bounds[i].below(&bounds[j]))
    }

    /// [`Ranking::update`] driven by a pairwise comparison, repeated until
    /// nothing more can be ranked.
    pub fn update_by(&mut self, below: impl Fn(usize, usize) -> bool) -> usize {
        let mut total = 0;
        loop {
            let placed = self.update_once(&below);
            if placed == 0 {
                return total;
            }
            total += placed;
        }
    }

    fn update_once(&mut self, below: &impl Fn(usize, usize) -> bool) -> usize {
        let free = self.free_slots();
        let mut placed = Vec::new();
        for &i in &self.unranked {
            let k = self.above(i, below);
            match self.overlapping(i, below).as_slice() {
                [] => placed.push((i, free[k], None)),
                &[j] if i < j && self.overlapping(j, below) == [i] => {
                    let first = free[k];
                    if first.is_multiple_of(2) && free.get(k + 1) == Some(&(first + 1)) {
                        placed.push((i, first, Some(first)));
                        placed.push((j, first + 1, Some(first)));
                    }
                }
                _ => {}
            }
        }
        for &(i, s, pair) in &placed {
            self.slot[i] = Some(s);
            self.pair_slot[i] = pair;
        }
        self.unranked.retain(|&i| self.slot[i].is_none());
        placed.len()
    }

    /// Ranked items in slot order.
    pub fn order(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .items
            .iter()
            .copied()
            .filter(|&i| self.slot[i].is_some())
            .collect();
        v.sort_by_key(|&i| self.slot[i]);
        v
    }

    /// Consecutive items of [`Ranking::order`] paired up.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.order().chunks_exact(2).map(|c| (c[0], c[1])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confbound::{BetaPolicy, Schedule};

    fn bounds(intervals: &[(f64, f64)]) -> Vec<Tracker> {
        let s = Schedule::new(BetaPolicy::Horizon { h: 10.0 }).unwrap();
        intervals
            .iter()
            .map(|&(lo, hi)| {
                let mut t = Tracker::new(&s);
                t.lower = lo;
                t.upper = hi;
                t
            })
            .collect()
    }

    const WIDE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

    #[test]
    fn disjoint_intervals_rank_everything() {
        let b = bounds(&[(0.1, 0.2), (0.7, 0.8), (0.4, 0.5), (0.9, 1.0)]);
        let mut r = Ranking::new(&[0, 1, 2, 3], 4);
        assert_eq!(r.update(&b), 4);
        assert!(r.is_done());
        assert_eq!(r.order(), vec![3, 1, 2, 0]);
        assert_eq!(r.pairs(), vec![(3, 1), (2, 0)]);
    }

    #[test]
    fn overlap_inside_one_pair_is_ranked() {
        let b = bounds(&[
            (0.9, 0.95),
            (0.8, 0.85),
            (0.55, 0.65),
            (0.58, 0.62),
            (0.3, 0.35),
            (0.1, 0.15),
        ]);
        let mut r = Ranking::new(&[0, 1, 2, 3, 4, 5], 6);
        r.update(&b);
        assert!(r.is_done());
        assert_eq!(r.pairs()[1], (2, 3));
        assert_eq!(r.known_above(3, &b), 2);
    }

    #[test]
    fn overlap_across_pairs_stays_unranked() {
        let b = bounds(&[(0.9, 0.95), (0.6, 0.7), (0.62, 0.68), (0.1, 0.2)]);
        let mut r = Ranking::new(&[0, 1, 2, 3], 4);
        r.update(&b);
        assert_eq!(r.unranked(), &[1, 2]);
        assert_eq!(r.known_above(1, &b), 1);
        assert_eq!(r.known_above(3, &b), 3);
    }

    #[test]
    fn sentinel_bounds_rank_nothing() {
        let b = bounds(&[WIDE; 4]);
        let mut r = Ranking::new(&[0, 1, 2, 3], 4);
        assert_eq!(r.update(&b), 0);
        assert!((0..4).all(|i| r.known_above(i, &b) == 0));
    }

    #[test]
    fn one_sided_overlap_is_not_enough() {
        // Item 1 overlaps only item 0, but item 0 also overlaps item 2.
        let b = bounds(&[(0.5, 0.9), (0.85, 0.95), (0.45, 0.55), (0.0, 0.1)]);
        let mut r = Ranking::new(&[0, 1, 2, 3], 4);
        r.update(&b);
        assert_eq!(r.unranked(), &[0, 1, 2]);
    }

    #[test]
    fn ranked_items_keep_their_slots() {
        let b = bounds(&[(0.9, 0.95), (0.4, 0.6), (0.45, 0.55), (0.1, 0.2)]);
        let mut r = Ranking::new(&[0, 1, 2, 3], 4);
        r.update(&b);
        assert_eq!(r.unranked(), &[1, 2]);
        // Later bounds for ranked items are ignored; the middle two fill slots 1 and 2.
        let b = bounds(&[WIDE, (0.5, 0.6), (0.3, 0.4), WIDE]);
        r.update(&b);
        assert!(r.is_done());
        assert_eq!(r.order(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn subset_of_labels() {
        let b = bounds(&[WIDE, WIDE, (0.6, 0.7), (0.3, 0.4), (0.8, 0.9), (0.1, 0.2)]);
        let mut r = Ranking::new(&[5, 2, 3, 4], 6);
        r.update(&b);
        assert_eq!(r.order(), vec![4, 2, 3, 5]);
    }
}
