//! Peer selection mechanisms.
//!
//! Ties in any score ordering are broken by ascending [`AgentId`]. Raw-score
//! mechanisms (vanilla, partition, credible subset) treat missing reviews as
//! zero; the dollar family and exact dollar partition give a silent or
//! all-zero reviewer a uniform split over its assigned reviewees.

mod baseline;
mod dollar;
mod dollar_partition;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use baseline::{credible_sets, credible_subset, partition_mechanism, partition_quotas, vanilla};
pub use dollar::{dollar_partition_raffle, dollar_raffle, dollar_shares, top_dollar};
pub use dollar_partition::{
    agent_scores, cluster_shares, edp_selection_probabilities, exact_dollar_partition, normalize,
    ClusterShares, DollarPartitionPlan,
};

use crate::error::{Error, Result};
use crate::model::{AgentId, Clustering, ReviewAssignment, ReviewProfile, SelectionOutcome};
use crate::scalar::Scalar;
use crate::seed::Seed;

/// Stable mechanism identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MechanismId {
    ExactDollarPartition,
    Vanilla,
    Partition,
    CredibleSubset,
    DollarRaffle,
    DollarPartitionRaffle,
    TopDollar,
}

impl MechanismId {
    pub const ALL: [MechanismId; 7] = [
        MechanismId::ExactDollarPartition,
        MechanismId::Vanilla,
        MechanismId::Partition,
        MechanismId::CredibleSubset,
        MechanismId::DollarRaffle,
        MechanismId::DollarPartitionRaffle,
        MechanismId::TopDollar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MechanismId::ExactDollarPartition => "edp",
            MechanismId::Vanilla => "vanilla",
            MechanismId::Partition => "partition",
            MechanismId::CredibleSubset => "credible-subset",
            MechanismId::DollarRaffle => "dollar-raffle",
            MechanismId::DollarPartitionRaffle => "dollar-partition-raffle",
            MechanismId::TopDollar => "top-dollar",
        }
    }

    /// Small integer used when deriving per-mechanism seeds.
    pub fn code(self) -> u64 {
        Self::ALL.iter().position(|m| *m == self).unwrap() as u64 + 1
    }

    pub fn needs_clustering(self) -> bool {
        matches!(
            self,
            MechanismId::ExactDollarPartition
                | MechanismId::Partition
                | MechanismId::DollarPartitionRaffle
        )
    }

    pub fn is_randomized(self) -> bool {
        matches!(
            self,
            MechanismId::ExactDollarPartition
                | MechanismId::CredibleSubset
                | MechanismId::DollarRaffle
                | MechanismId::DollarPartitionRaffle
        )
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown mechanism {s:?}")))
    }
}

/// Runs any mechanism by identifier.
pub fn run_mechanism<S: Scalar>(
    mechanism: MechanismId,
    profile: &ReviewProfile<S>,
    clustering: Option<&Clustering>,
    assignment: &ReviewAssignment,
    k: usize,
    seed: Seed,
) -> Result<SelectionOutcome<S>> {
    let need_clusters = || {
        clustering.ok_or_else(|| {
            Error::InvalidParameter(format!("mechanism {mechanism} requires a clustering"))
        })
    };
    match mechanism {
        MechanismId::ExactDollarPartition => {
            exact_dollar_partition(profile, need_clusters()?, assignment, k, seed)
        }
        MechanismId::Vanilla => vanilla(profile, k),
        MechanismId::Partition => partition_mechanism(profile, need_clusters()?, assignment, k),
        MechanismId::CredibleSubset => credible_subset(profile, assignment, k, seed),
        MechanismId::DollarRaffle => dollar_raffle(profile, Some(assignment), k, seed),
        MechanismId::DollarPartitionRaffle => {
            dollar_partition_raffle(profile, need_clusters()?, assignment, k, seed)
        }
        MechanismId::TopDollar => top_dollar(profile, Some(assignment), k),
    }
}

/// Orders `agents` by descending score, ascending id on ties.
pub fn rank_by_score<S: Scalar>(agents: &[AgentId], scores: &[S]) -> Vec<AgentId> {
    let mut ranked = agents.to_vec();
    ranked.sort_by(|a, b| beats_order(*a, *b, scores));
    ranked
}

fn beats_order<S: Scalar>(a: AgentId, b: AgentId, scores: &[S]) -> Ordering {
    scores[b.0]
        .partial_cmp(&scores[a.0])
        .unwrap_or(Ordering::Equal)
        .then(a.cmp(&b))
}

/// True when `a` is ranked above `b` under the global tie-break.
pub(crate) fn outranks<S: Scalar>(a: AgentId, score_a: &S, b: AgentId, score_b: &S) -> bool {
    match score_a.partial_cmp(score_b) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => a < b,
    }
}

/// The `k` best agents overall.
pub(crate) fn top_k<S: Scalar>(scores: &[S], k: usize) -> BTreeSet<AgentId> {
    let all: Vec<AgentId> = (0..scores.len()).map(AgentId).collect();
    rank_by_score(&all, scores).into_iter().take(k).collect()
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "target size {k} exceeds the number of agents {n}"
        )));
    }
    Ok(())
}
