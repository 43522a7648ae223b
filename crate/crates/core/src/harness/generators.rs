//! Instance families used by the benchmark experiments.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{streams, SeededRng};
use crate::error::{Error, Result};
use crate::model::{Rank1Instance, RewardDist};

/// Slack allowed when checking that generated parameters stay in `[0, 1]`.
const RANGE_SLACK: f64 = 1e-12;

fn sorted_draws(n: usize, top: f64, width: f64, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = SeededRng::new(seed, stream).rng();
    let mut rest: Vec<f64> = (1..n).map(|_| width * rng.gen::<f64>()).collect();
    rest.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::with_capacity(n);
    out.push(top);
    out.extend(rest);
    out
}

/// Square bipartite instance with `u1 = v1` and the other parameters drawn
/// uniformly on `[0, 2(u1 − delta)]`, sorted in decreasing order.
///
/// Rows and columns use independent random streams of `seed`.
pub fn generate_bipartite(n: usize, u1: f64, delta: f64, seed: u64) -> Result<Rank1Instance> {
    if n == 0 || !(0.0..=1.0).contains(&u1) || !(0.0..=u1).contains(&delta) {
        return Err(Error::Parameter(format!(
            "need n >= 1 and 0 <= delta <= u1 <= 1, got n={n}, u1={u1}, delta={delta}"
        )));
    }
    let width = 2.0 * (u1 - delta);
    let u = sorted_draws(n, u1, width, seed, streams::GENERATOR);
    let v = sorted_draws(n, u1, width, seed, streams::GENERATOR_COLUMNS);
    Rank1Instance::bipartite(u, v, RewardDist::Bernoulli)
}

fn check_range(values: &[f64]) -> Result<Vec<f64>> {
    if values
        .iter()
        .any(|&x| !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&x))
    {
        return Err(Error::Parameter(format!(
            "generated parameters leave [0,1]: {values:?}"
        )));
    }
    Ok(values.iter().map(|x| x.clamp(0.0, 1.0)).collect())
}

fn doubled(values: impl Iterator<Item = f64>) -> Vec<f64> {
    values.flat_map(|x| [x, x]).collect()
}

/// `2n` items in equal pairs at levels `(n−1)·step, …, step, 0`.
pub fn generate_mono_equalpairs(n: usize, step: f64) -> Result<Rank1Instance> {
    if n == 0 || step.is_nan() || step < 0.0 {
        return Err(Error::Parameter(format!(
            "need n >= 1 and step >= 0, got {n}, {step}"
        )));
    }
    let u = check_range(&doubled((1..=n).map(|i| (n - i) as f64 * step)))?;
    Rank1Instance::monopartite(u, RewardDist::Bernoulli)
}

/// `2n` items in equal pairs spaced by `step` and centred on `mu`.
pub fn generate_mono_centered(n: usize, mu: f64, step: f64) -> Result<Rank1Instance> {
    if n == 0 || step.is_nan() || step < 0.0 {
        return Err(Error::Parameter(format!(
            "need n >= 1 and step >= 0, got {n}, {step}"
        )));
    }
    let level = |i: usize| mu + (n as f64 + 1.0 - 2.0 * i as f64) * step / 2.0;
    let u = check_range(&doubled((1..=n).map(level)))?;
    Rank1Instance::monopartite(u, RewardDist::Bernoulli)
}

/// How a run obtains its instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// A fresh random instance for every run, drawn from the run seed.
    Bipartite {
        n: usize,
        u1: f64,
        delta: f64,
    },
    MonoEqualpairs {
        n: usize,
        delta_tilde: f64,
    },
    MonoCentered {
        n: usize,
        mu: f64,
        delta_tilde: f64,
    },
    Fixed {
        instance: Rank1Instance,
    },
}

impl GeneratorSpec {
    pub fn instance(&self, seed: u64) -> Result<Rank1Instance> {
        match self {
            GeneratorSpec::Bipartite { n, u1, delta } => generate_bipartite(*n, *u1, *delta, seed),
            GeneratorSpec::MonoEqualpairs { n, delta_tilde } => {
                generate_mono_equalpairs(*n, *delta_tilde)
            }
            GeneratorSpec::MonoCentered { n, mu, delta_tilde } => {
                generate_mono_centered(*n, *mu, *delta_tilde)
            }
            GeneratorSpec::Fixed { instance } => Ok(instance.clone()),
        }
    }
}
