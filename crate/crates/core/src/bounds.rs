//! Closed-form reference values of the regret and sample-complexity bounds,
//! without their unknown multiplicative constants.
//!
//! Every report lists named components; values that are infinite for an
//! instance (a vanishing gap in a denominator) are left out rather than
//! reported as `inf`, and lower bounds are clamped at zero.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{compute_gaps, Rank1Instance};

/// Horizon and confidence used to turn `A · log(·)` forms into numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    pub horizon: f64,
    pub delta: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        BoundInputs {
            horizon: 2e5,
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    /// Headline value of the report, `A · log(·)` without constants.
    pub leading_constant_free_value: f64,
    pub components: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(name: &str) -> Self {
        BoundReport {
            name: name.into(),
            leading_constant_free_value: 0.0,
            components: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn put(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.components.insert(key.into(), value);
        } else {
            self.notes
                .push(format!("{key} is unbounded on this instance"));
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.components.get(key).copied()
    }
}

fn check_inputs(inputs: &BoundInputs) -> Result<()> {
    if !(inputs.delta > 0.0 && inputs.delta < 1.0) || inputs.horizon.is_nan() || inputs.horizon <= 1.0 {
        return Err(Error::Parameter(format!(
            "need delta in (0,1) and horizon > 1, got {inputs:?}"
        )));
    }
    Ok(())
}

fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `Σ 1/(scale · gap)^power` over strictly positive gaps.
fn inverse_gap_sum(gaps: &[f64], scale: f64, power: i32) -> f64 {
    gaps.iter()
        .filter(|&&g| g > 0.0)
        .map(|&g| (scale * g).powi(-power))
        .sum()
}

/// Bipartite pair-selection bounds: regret and exploration complexities plus
/// the Gaussian and Bernoulli lower bounds on the exploration time.
pub fn pair_bounds(inst: &Rank1Instance, inputs: &BoundInputs) -> Result<BoundReport> {
    if !inst.is_bipartite() {
        return Err(Error::Shape("pair bounds need a bipartite instance".into()));
    }
    check_inputs(inputs)?;
    let g = compute_gaps(inst);
    let (u1, v1) = (max_of(&inst.u), max_of(inst.col_params()));
    let a_regret = inverse_gap_sum(&g.delta_row, v1, 1) + inverse_gap_sum(&g.delta_col, u1, 1);
    let a_explore = inverse_gap_sum(&g.delta_row, v1, 2) + inverse_gap_sum(&g.delta_col, u1, 2);
    let log_t = inputs.horizon.ln();
    let log_d = (1.0 / inputs.delta).ln();
    let lower = a_explore * (log_d - 1.0);

    let mut r = BoundReport::new("pair");
    r.put("a_regret", a_regret);
    r.put("a_explore", a_explore);
    r.put("regret_bound", a_regret * log_t);
    r.put("explore_bound", a_explore * log_d);
    r.put("lower_gaussian", lower.max(0.0));
    let best = u1 * v1;
    r.put(
        "lower_bernoulli",
        (best.min(1.0 - best) / 4.0 * lower).max(0.0),
    );
    r.leading_constant_free_value = a_regret * log_t;
    Ok(r)
}

fn require_mono(inst: &Rank1Instance, what: &str) -> Result<()> {
    if inst.is_bipartite() {
        return Err(Error::Shape(format!("{what} need a monopartite instance")));
    }
    Ok(())
}

/// Monopartite pair-selection bounds and the matching-selection regret rate.
pub fn mono_bounds(inst: &Rank1Instance, inputs: &BoundInputs) -> Result<BoundReport> {
    require_mono(inst, "monopartite bounds")?;
    check_inputs(inputs)?;
    let g = compute_gaps(inst);
    let u1 = max_of(&inst.u);
    let log_t = inputs.horizon.ln();
    let log_d = (1.0 / inputs.delta).ln();
    let a_regret = inverse_gap_sum(&g.delta_2i, u1, 1);
    let a_explore = inverse_gap_sum(&g.delta_2i, u1, 2);
    let a_select = inverse_gap_sum(&g.delta_pairsel, u1, 2);

    let mut r = BoundReport::new("mono");
    r.put("a_regret", a_regret);
    r.put("a_explore", a_explore);
    r.put("a_pair_select", a_select);
    r.put("regret_bound", a_regret * log_t);
    r.put("explore_bound", a_explore * log_d);
    r.put("pair_select_bound", a_select * log_d);
    let n = (inst.u.len() / 2) as f64;
    if let Some(dmin) = g.delta_min {
        if g.delta_min_approximate {
            r.notes
                .push("delta_min approximated from adjacent pairs".into());
        }
        let rate = n * n.ln() / dmin;
        r.put("matching_regret_rate", rate);
        r.put("matching_regret_bound", rate * log_t);
    }
    r.leading_constant_free_value = a_regret * log_t;
    Ok(r)
}

/// Exploration bounds for full matching identification.
///
/// Three versions of the refinement factor α are emitted. `alpha_main`
/// scales the smallest gap by `(u1+u2)/2` without squaring,
/// `alpha_appendix` squares the ratio with `(u1+u2)/4`, and
/// `alpha_proof_mu4` squares it with the mean of the top four parameters.
pub fn matching_id_bounds(inst: &Rank1Instance, inputs: &BoundInputs) -> Result<BoundReport> {
    require_mono(inst, "matching identification bounds")?;
    check_inputs(inputs)?;
    let g = compute_gaps(inst);
    let w = sorted_desc(&inst.u);
    let log_d = (1.0 / inputs.delta).ln();
    let mut r = BoundReport::new("matching_id");

    if let Some(gamma) = g.gamma_min {
        r.put("gamma_min", gamma);
        r.put("gamma_bound", log_d / (gamma * gamma));
        r.leading_constant_free_value = log_d / (gamma * gamma);
    } else {
        r.notes
            .push("a single pair has no ranking to identify".into());
        return Ok(r);
    }

    let sq_total: f64 = w.iter().map(|x| x * x).sum();
    r.put(
        "lower_all_gaps",
        inverse_gap_sum(&g.delta_pairsel, 1.0, 2) / sq_total * log_d,
    );

    let pair_gap = |k: usize| w[2 * k - 1] - w[2 * k];
    let (Some(s), Some(h)) = (g.s_index, g.h_index) else {
        r.notes
            .push("fewer than three pairs: smallest-gap terms undefined".into());
        return Ok(r);
    };
    let (gs, gh) = (pair_gap(s), pair_gap(h));
    let weighted_h = g.mu_excl[h - 1] * gh;
    let top2 = w[0] * w[0] + w[1] * w[1];
    r.put("s_index", s as f64);
    r.put("h_index", h as f64);
    r.put("lower_smallest_gap", log_d / (top2 * gs * gs));

    let ratio = |scale: f64| {
        let x = scale * gs / weighted_h;
        if x.is_nan() {
            1.0
        } else {
            x
        }
    };
    let alphas = [
        ("main", ratio((w[0] + w[1]) / 2.0).min(1.0)),
        ("appendix", ratio((w[0] + w[1]) / 4.0).powi(2).min(1.0)),
        (
            "proof_mu4",
            ratio(w[..4].iter().sum::<f64>() / 4.0).powi(2).min(1.0),
        ),
    ];
    for (label, alpha) in alphas {
        r.put(&format!("alpha_{label}"), alpha);
        let refined = log_d / ((1.0 - alpha).powi(2) * top2 * gs * gs);
        r.put(&format!("refined_bound_{label}"), refined);
    }

    let gaps: Vec<f64> = (1..w.len() / 2).map(pair_gap).collect();
    let (lo, hi) = gaps.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    r.notes.push(if hi <= 2.0 * lo {
        "regime: comparable pair gaps".into()
    } else {
        "regime: one pair gap much smaller than the others".into()
    });
    Ok(r)
}

/// `r_{i,j}` for one-based pair indices on sorted parameters.
fn pair_interaction(w: &[f64], i: usize, j: usize) -> f64 {
    let u = |k: usize| w[k - 1];
    2.0 * (u(2 * i - 1) - u(2 * j)) * (u(2 * i) - u(2 * j - 1))
        + (u(2 * i - 1) - u(2 * i)) * (u(2 * j - 1) - u(2 * j))
}

/// Regret bounds of cluster splitting (`u_d`) and of an exploration-first
/// round robin (`u_i`) until ranks `m` and `m+1` separate, once the top two
/// items are known.
///
/// `m` is one-based in `3..2N`; by default the rank with the widest gap to
/// its successor.
pub fn exploration_first_ratio(inst: &Rank1Instance, m: Option<usize>) -> Result<BoundReport> {
    require_mono(inst, "exploration-first bounds")?;
    let w = sorted_desc(&inst.u);
    let n_items = w.len();
    if n_items < 4 {
        return Err(Error::Parameter("needs at least two pairs".into()));
    }
    let n = n_items / 2;
    let gap = |k: usize| w[k - 1] - w[k];
    let m = match m {
        Some(m) if (3..n_items).contains(&m) => m,
        Some(m) => {
            return Err(Error::Parameter(format!(
                "m must lie in 3..{}, got {m}",
                n_items - 1
            )))
        }
        None => (3..n_items).fold(3, |best, k| if gap(k) > gap(best) { k } else { best }),
    };
    let d = gap(m);
    let excl = w[m - 1] + w[m];
    let inner: f64 = (2..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .map(|(i, j)| pair_interaction(&w, i, j))
        .sum();
    let with_top: f64 = (2..=n).map(|j| pair_interaction(&w, 1, j)).sum();
    let rest: f64 = w[2..].iter().sum::<f64>() - excl;
    let all: f64 = w.iter().sum::<f64>() - excl;
    let u_d = if inner == 0.0 {
        0.0
    } else {
        (2 * n - 3) as f64 / (d * d) * inner / (rest * rest)
    };
    let u_i = (2 * n - 2) as f64 / (d * d) * (with_top + inner) / (all * all);

    let mut r = BoundReport::new("exploration_first");
    r.put("m", m as f64);
    r.put("u_d", u_d);
    r.put("u_i", u_i);
    r.put("ratio", u_d / u_i);
    r.leading_constant_free_value = u_d / u_i;
    Ok(r)
}

/// Every report applicable to the instance.
pub fn all_bounds(inst: &Rank1Instance, inputs: &BoundInputs) -> Result<Vec<BoundReport>> {
    if inst.is_bipartite() {
        return Ok(vec![pair_bounds(inst, inputs)?]);
    }
    let mut out = vec![
        mono_bounds(inst, inputs)?,
        matching_id_bounds(inst, inputs)?,
    ];
    if inst.u.len() >= 4 {
        out.push(exploration_first_ratio(inst, None)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RewardDist;
    use approx::assert_relative_eq;

    fn mono(u: &[f64]) -> Rank1Instance {
        Rank1Instance::monopartite(u.to_vec(), RewardDist::Bernoulli).unwrap()
    }

    fn inputs() -> BoundInputs {
        BoundInputs {
            horizon: 1e4,
            delta: 0.01,
        }
    }

    #[test]
    fn pair_examples() {
        let b = Rank1Instance::bipartite(vec![0.9, 0.2], vec![0.9, 0.2], RewardDist::Bernoulli)
            .unwrap();
        let r = pair_bounds(&b, &inputs()).unwrap();
        assert_relative_eq!(r.get("a_regret").unwrap(), 2.0 / 0.63, max_relative = 1e-12);
        assert_relative_eq!(
            r.get("a_explore").unwrap(),
            2.0 / (0.63 * 0.63),
            max_relative = 1e-12
        );
        let one = Rank1Instance::bipartite(vec![0.5], vec![0.5], RewardDist::Bernoulli).unwrap();
        let r = pair_bounds(&one, &inputs()).unwrap();
        assert_eq!(r.get("a_regret"), Some(0.0));
        assert_eq!(r.get("lower_gaussian"), Some(0.0));
        assert!(pair_bounds(&mono(&[0.5, 0.4]), &inputs()).is_err());
    }

    #[test]
    fn mono_examples() {
        let r = mono_bounds(&mono(&[0.9, 0.8, 0.3, 0.2]), &inputs()).unwrap();
        assert_relative_eq!(
            r.get("a_regret").unwrap(),
            1.0 / 0.45 + 1.0 / 0.54,
            max_relative = 1e-12
        );
        let r = mono_bounds(&mono(&[0.7, 0.4]), &inputs()).unwrap();
        assert_eq!(r.get("a_regret"), Some(0.0));
        assert_eq!(r.get("a_pair_select"), Some(0.0));
    }

    #[test]
    fn regimes() {
        let equal = matching_id_bounds(&mono(&[0.9, 0.9, 0.7, 0.7, 0.5, 0.5, 0.3, 0.3]), &inputs())
            .unwrap();
        let ratio = equal.get("gamma_bound").unwrap() / equal.get("lower_all_gaps").unwrap();
        assert!(ratio > 1.0 && ratio < 5.0, "{ratio}");
        assert_eq!(equal.get("alpha_appendix"), Some(1.0));
        assert!(equal.get("refined_bound_appendix").is_none());
        assert!(equal.notes.iter().any(|n| n.contains("comparable")));

        let tiny = matching_id_bounds(
            &mono(&[0.9, 0.9, 0.7, 0.7, 0.69, 0.69, 0.3, 0.3]),
            &inputs(),
        )
        .unwrap();
        for label in ["main", "appendix", "proof_mu4"] {
            let refined = tiny.get(&format!("refined_bound_{label}")).unwrap();
            assert!(
                refined < 0.25 * tiny.get("gamma_bound").unwrap(),
                "{label}: {refined}"
            );
        }
        assert_eq!(tiny.get("s_index"), Some(2.0));
        assert!(tiny.notes.iter().any(|n| n.contains("much smaller")));
    }

    #[test]
    fn small_instances_give_partial_reports() {
        let r = matching_id_bounds(&mono(&[0.9, 0.8, 0.3, 0.2]), &inputs()).unwrap();
        assert!(r.get("gamma_bound").is_some());
        assert!(r.get("alpha_main").is_none());
        let r = matching_id_bounds(&mono(&[0.9, 0.8]), &inputs()).unwrap();
        assert!(r.components.is_empty());
    }

    #[test]
    fn exploration_first_ratio_diverges_with_weak_second_item() {
        let chain = |rho2: f64, rest: f64| {
            let mut u = vec![1.0, rho2];
            for _ in 0..6 {
                let last = *u.last().unwrap();
                u.push(last * rest);
            }
            mono(&u)
        };
        let ratios: Vec<f64> = [0.4, 0.2, 0.1, 0.05, 0.02]
            .iter()
            .map(|&x| {
                exploration_first_ratio(&chain(x, 0.7), None)
                    .unwrap()
                    .leading_constant_free_value
            })
            .collect();
        assert!(ratios.windows(2).all(|p| p[1] > p[0]), "{ratios:?}");
        let bounded: Vec<f64> = [0.55, 0.7, 0.85, 0.95]
            .iter()
            .map(|&x| {
                exploration_first_ratio(&chain(x, 0.8), None)
                    .unwrap()
                    .leading_constant_free_value
            })
            .collect();
        assert!(bounded.iter().all(|&x| x < 2.0), "{bounded:?}");
    }

    #[test]
    fn exploration_first_smallest_case() {
        let r = exploration_first_ratio(&mono(&[0.9, 0.7, 0.5, 0.2]), None).unwrap();
        assert_eq!(r.get("m"), Some(3.0));
        assert_eq!(r.get("u_d"), Some(0.0));
        assert!(r.get("u_i").unwrap() > 0.0);
        assert!(exploration_first_ratio(&mono(&[0.9, 0.7]), None).is_err());
        assert!(exploration_first_ratio(&mono(&[0.9, 0.7, 0.5, 0.2]), Some(4)).is_err());
    }
}
