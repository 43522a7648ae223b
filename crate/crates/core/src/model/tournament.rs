/// One round of a round-robin tournament.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round<T> {
    pub pairs: Vec<(T, T)>,
    /// The item sitting out, for odd participant counts.
    pub bye: Option<T>,
}

/// All-play-all schedule built with the circle method.
///
/// Even counts give `n - 1` perfect rounds; odd counts give `n` rounds with
/// one bye each. Every unordered pair meets exactly once.
pub fn round_robin_schedule<T: Copy>(items: &[T]) -> Vec<Round<T>> {
    if items.len() < 2 {
        return Vec::new();
    }
    let mut slots: Vec<Option<T>> = items.iter().copied().map(Some).collect();
    if slots.len() % 2 == 1 {
        slots.push(None);
    }
    let n = slots.len();
    let mut rounds = Vec::with_capacity(n - 1);
    for _ in 0..n - 1 {
        let mut pairs = Vec::with_capacity(n / 2);
        let mut bye = None;
        for k in 0..n / 2 {
            match (slots[k], slots[n - 1 - k]) {
                (Some(a), Some(b)) => pairs.push((a, b)),
                (Some(a), None) | (None, Some(a)) => bye = Some(a),
                (None, None) => unreachable!("only one padding slot"),
            }
        }
        rounds.push(Round { pairs, bye });
        slots[1..].rotate_right(1);
    }
    rounds
}
