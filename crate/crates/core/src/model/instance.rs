use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether rewards factor as `u vᵀ` (rows against columns) or `u uᵀ` (items against items).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Bipartite,
    Monopartite,
}

/// Noise model of a single pair observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardDist {
    Bernoulli,
    Gaussian { sigma: f64 },
}

impl RewardDist {
    /// Unit-variance Gaussian noise.
    pub fn gaussian() -> Self {
        RewardDist::Gaussian { sigma: 1.0 }
    }

    /// Noise-free observations, handy for deterministic checks.
    pub fn noiseless() -> Self {
        RewardDist::Gaussian { sigma: 0.0 }
    }
}

#[derive(Deserialize)]
struct RawInstance {
    kind: InstanceKind,
    u: Vec<f64>,
    #[serde(default)]
    v: Option<Vec<f64>>,
    dist: RewardDist,
}

impl TryFrom<RawInstance> for Rank1Instance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        let inst = Rank1Instance {
            kind: raw.kind,
            u: raw.u,
            v: raw.v,
            dist: raw.dist,
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// Hidden ground truth of a rank-1 problem.
///
/// Item ids are zero-based positions in `u` (rows, or all items in the
/// monopartite case) and `v` (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct Rank1Instance {
    pub kind: InstanceKind,
    pub u: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    pub dist: RewardDist,
}

impl Rank1Instance {
    pub fn bipartite(u: Vec<f64>, v: Vec<f64>, dist: RewardDist) -> Result<Self> {
        let inst = Rank1Instance {
            kind: InstanceKind::Bipartite,
            u,
            v: Some(v),
            dist,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn monopartite(u: Vec<f64>, dist: RewardDist) -> Result<Self> {
        let inst = Rank1Instance {
            kind: InstanceKind::Monopartite,
            u,
            v: None,
            dist,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInstance(msg.to_string()));
        match self.kind {
            InstanceKind::Bipartite => {
                let Some(v) = &self.v else {
                    return bad("bipartite instance needs a column vector v");
                };
                if self.u.is_empty() || v.is_empty() {
                    return bad("bipartite instance needs at least one row and one column");
                }
            }
            InstanceKind::Monopartite => {
                if self.v.is_some() {
                    return bad("monopartite instance must not carry v");
                }
                if self.u.is_empty() || !self.u.len().is_multiple_of(2) {
                    return bad("monopartite instance needs a positive even number of items");
                }
            }
        }
        let all = self.u.iter().chain(self.v.iter().flatten());
        for &x in all.clone() {
            if !x.is_finite() {
                return bad("parameters must be finite");
            }
        }
        match self.dist {
            RewardDist::Bernoulli => {
                if all.clone().any(|&x| !(0.0..=1.0).contains(&x)) {
                    return bad("bernoulli parameters must lie in [0,1]");
                }
            }
            RewardDist::Gaussian { sigma } => {
                if !(sigma.is_finite() && sigma >= 0.0) {
                    return bad("gaussian sigma must be finite and non-negative");
                }
            }
        }
        Ok(())
    }

    pub fn is_bipartite(&self) -> bool {
        self.kind == InstanceKind::Bipartite
    }

    /// Number of row items (all items when monopartite).
    pub fn n_rows(&self) -> usize {
        self.u.len()
    }

    /// Number of column items (all items when monopartite).
    pub fn n_cols(&self) -> usize {
        self.v.as_ref().map_or(self.u.len(), Vec::len)
    }

    /// Column-side parameters; the item vector itself when monopartite.
    pub fn col_params(&self) -> &[f64] {
        self.v.as_deref().unwrap_or(&self.u)
    }

    /// Expected reward of pairing row-side `i` with column-side `j`.
    pub fn mean(&self, i: usize, j: usize) -> f64 {
        self.u[i] * self.col_params()[j]
    }

    pub fn with_dist(mut self, dist: RewardDist) -> Result<Self> {
        self.dist = dist;
        self.validate()?;
        Ok(self)
    }

    /// Stable hex digest of the canonical JSON form.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("instance serializes");
        let hash = Sha256::digest(json.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Indices sorted by decreasing value, ties by lowest index.
pub fn rank_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}
