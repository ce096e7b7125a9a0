use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Pick distribution of the zealot voter model.
///
/// `p[k]` is the probability that an update consults `k` neighbours; `p[0]`
/// is the rate at which a zealot spontaneously reverts to an ordinary voter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    p: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    p: Vec<f64>,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = crate::Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.p)
    }
}

impl From<ModelParams> for RawParams {
    fn from(m: ModelParams) -> Self {
        RawParams { p: m.p }
    }
}

impl ModelParams {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(invalid("empty pick distribution"));
        }
        if let Some(k) = p.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(invalid(format!("p[{k}] = {} is not a probability", p[k])));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid(format!("pick probabilities sum to {total}, not 1")));
        }
        let mut p = p;
        while p.len() > 1 && p[p.len() - 1] == 0.0 {
            p.pop();
        }
        Ok(ModelParams { p })
    }

    /// Builds params from `(k, p_k)` pairs; unspecified entries are zero.
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        let len = pairs.iter().map(|&(k, _)| k + 1).max().unwrap_or(1);
        let mut p = vec![0.0; len];
        for &(k, v) in pairs {
            p[k] += v;
        }
        Self::new(p)
    }

    pub fn p(&self, k: usize) -> f64 {
        self.p.get(k).copied().unwrap_or(0.0)
    }

    pub fn p0(&self) -> f64 {
        self.p[0]
    }

    /// Largest `k` with `p_k > 0`.
    pub fn max_k(&self) -> usize {
        self.p.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    /// Mean number of consulted neighbours, `sum k p_k`.
    pub fn mu(&self) -> f64 {
        self.p.iter().enumerate().map(|(k, &pk)| k as f64 * pk).sum()
    }

    /// Global survival margin `sum_{k>=2} (k-1) p_k - p_0`.
    pub fn gamma(&self) -> f64 {
        self.branching_excess() - self.p0()
    }

    /// `sum_{k>=2} (k-1) p_k`.
    pub fn branching_excess(&self) -> f64 {
        self.p.iter().enumerate().skip(2).map(|(k, &pk)| (k - 1) as f64 * pk).sum()
    }

    /// Total event rate at a site of the given degree: `p_0 + d (1 - p_0)`.
    pub fn site_rate(&self, degree: u32) -> f64 {
        self.p0() + degree as f64 * (1.0 - self.p0())
    }

    /// Errors if some `p_k > 0` with `k > d_min`.
    pub fn check_against(&self, d_min: u32) -> Result<()> {
        if self.max_k() > d_min as usize {
            return Err(invalid(format!("p_{} > 0 but the tree has minimum degree {d_min}", self.max_k())));
        }
        Ok(())
    }

    /// Chooses the number of sources for an event at a site of degree `d`,
    /// given a uniform `u` in `[0, 1)`. Events carry `k` sources with
    /// probability `p_0 / R` for `k = 0` and `d p_k / R` otherwise, where
    /// `R` is [`site_rate`](Self::site_rate).
    #[inline]
    pub(crate) fn pick_k(&self, degree: u32, u: f64) -> usize {
        let rate = self.site_rate(degree);
        let mut acc = self.p0() / rate;
        if u < acc {
            return 0;
        }
        let d = degree as f64;
        for k in 1..self.p.len() {
            acc += d * self.p[k] / rate;
            if u < acc {
                return k;
            }
        }
        // Rounding at the top end.
        (1..self.p.len()).rev().find(|&k| self.p[k] > 0.0).unwrap_or(0)
    }
}
