//! Winner-set overlap and summary statistics.

use std::collections::BTreeSet;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::generation::GroundTruth;
use crate::model::AgentId;

/// `|W ∩ W'| / k`, kept as a count pair so it stays exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapScore {
    pub common: usize,
    pub k: usize,
}

impl OverlapScore {
    /// Exact value; an empty target (`k = 0`) counts as full agreement.
    pub fn value(&self) -> Ratio<usize> {
        if self.k == 0 {
            Ratio::from_integer(1)
        } else {
            Ratio::new(self.common, self.k)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.k == 0 {
            1.0
        } else {
            self.common as f64 / self.k as f64
        }
    }
}

pub fn overlap(w: &BTreeSet<AgentId>, reference: &BTreeSet<AgentId>, k: usize) -> OverlapScore {
    OverlapScore {
        common: w.intersection(reference).count(),
        k,
    }
}

/// The first `k` agents of the reference order.
pub fn ground_truth_topk(sigma: &GroundTruth, k: usize) -> BTreeSet<AgentId> {
    sigma.sigma().iter().take(k).copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

pub fn summarize(samples: &[f64]) -> Result<SummaryStats> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples to summarize".into()));
    }
    let count = samples.len();
    let mean = samples.iter().sum::<f64>() / count as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / count as f64;
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SummaryStats {
        // clamp away rounding drift so min <= mean <= max holds
        mean: mean.clamp(min, max),
        std: var.sqrt(),
        min,
        max,
        count,
    })
}
