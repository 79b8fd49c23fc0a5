//! Exact Dollar Partition.
//!
//! Each reviewer spreads one unit of value over the agents it reviews, all of
//! which lie outside its own cluster. A cluster's dollar share is the value it
//! receives divided by `n`, its fractional quota is `share * k`, and the
//! integer quotas are drawn from the apportionment lottery. Within a cluster
//! the agents with the highest incoming value win.
//!
//! An agent never reviews its own cluster, so it can neither move its
//! cluster's quota nor its own rank inside the cluster.

use std::collections::{BTreeMap, BTreeSet};

use crate::apportionment::{allocation_from_shares, sample_allocation};
use crate::error::{Error, Result};
use crate::model::{
    validate_instance, AgentId, AllocationDistribution, Clustering, NiceAllocation,
    NormalizedProfile, ReviewAssignment, ReviewProfile, SelectionOutcome, ShareVector,
    ValidationMode,
};
use crate::scalar::Scalar;
use crate::seed::Seed;
use crate::Rational;

use super::{check_k, rank_by_score};

/// Dollar share of each cluster. Sums to one when every agent reviews.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterShares<S = Rational> {
    pub x: Vec<S>,
}

/// Scales every reviewer's assigned reviews to sum to one.
///
/// A reviewer that submitted nothing, or only zeros, gives `1/m` to each of
/// its `m` assigned reviewees. Scoring an unassigned agent is an error.
pub fn normalize<S: Scalar>(
    profile: &ReviewProfile<S>,
    assignment: &ReviewAssignment,
) -> Result<NormalizedProfile<S>> {
    if profile.n() != assignment.n() {
        return Err(Error::InvalidParameter(format!(
            "profile has {} agents but the assignment has {}",
            profile.n(),
            assignment.n()
        )));
    }
    let mut rows = Vec::with_capacity(profile.n());
    for i in (0..profile.n()).map(AgentId) {
        let assigned = assignment.reviewees(i);
        let raw = profile.row(i);
        if let Some(&j) = raw.keys().find(|j| !assigned.contains(j)) {
            return Err(Error::UnassignedReview {
                reviewer: i.0,
                reviewee: j.0,
            });
        }
        let total = raw.values().fold(S::zero(), |acc, v| acc + v.clone());
        let row: BTreeMap<AgentId, S> = if total.is_negligible() {
            let uniform = S::one() / S::from_usize(assigned.len().max(1));
            assigned.iter().map(|&j| (j, uniform.clone())).collect()
        } else {
            assigned
                .iter()
                .map(|&j| {
                    let v = raw.get(&j).cloned().unwrap_or_else(S::zero);
                    (j, v / total.clone())
                })
                .collect()
        };
        rows.push(row);
    }
    Ok(NormalizedProfile { rows })
}

/// Cluster dollar shares `x` and quotas `s = x * k`.
pub fn cluster_shares<S: Scalar>(
    normalized: &NormalizedProfile<S>,
    clustering: &Clustering,
    k: usize,
) -> Result<(ClusterShares<S>, ShareVector<S>)> {
    let n = normalized.n();
    if clustering.n() != n {
        return Err(Error::InvalidParameter(format!(
            "clustering covers {} agents, profile has {n}",
            clustering.n()
        )));
    }
    let mut incoming = vec![S::zero(); clustering.ell()];
    for (i, j, v) in normalized.entries() {
        if clustering.same_cluster(i, j) {
            return Err(Error::InvalidParameter(format!(
                "agent {i} holds a value for {j} inside its own cluster"
            )));
        }
        let c = clustering.cluster_of(j);
        incoming[c] = incoming[c].clone() + v.clone();
    }
    let n_s = S::from_usize(n.max(1));
    let x: Vec<S> = incoming.into_iter().map(|v| v / n_s.clone()).collect();
    let k_s = S::from_usize(k);
    let s: Vec<S> = x.iter().map(|xi| xi.clone() * k_s.clone()).collect();
    let shares = ShareVector::with_target(s, k)?;
    Ok((ClusterShares { x }, shares))
}

/// Incoming normalized value per agent from reviewers outside its cluster.
pub fn agent_scores<S: Scalar>(normalized: &NormalizedProfile<S>, clustering: &Clustering) -> Vec<S> {
    let mut scores = vec![S::zero(); normalized.n()];
    for (i, j, v) in normalized.entries() {
        if !clustering.same_cluster(i, j) {
            scores[j.0] = scores[j.0].clone() + v.clone();
        }
    }
    scores
}

/// Everything exact dollar partition derives before the random draw.
#[derive(Debug, Clone)]
pub struct DollarPartitionPlan<S = Rational> {
    pub k: usize,
    pub cluster_shares: ClusterShares<S>,
    pub shares: ShareVector<S>,
    pub distribution: AllocationDistribution<S>,
    pub scores: Vec<S>,
    /// Members of each cluster, best first.
    pub ranking: Vec<Vec<AgentId>>,
}

impl<S: Scalar> DollarPartitionPlan<S> {
    pub fn build(
        profile: &ReviewProfile<S>,
        clustering: &Clustering,
        assignment: &ReviewAssignment,
        k: usize,
    ) -> Result<Self> {
        check_k(k, profile.n())?;
        validate_instance(profile, clustering, assignment, k, ValidationMode::Lenient).into_result()?;
        let normalized = normalize(profile, assignment)?;
        let (cluster_shares, shares) = cluster_shares(&normalized, clustering, k)?;
        let distribution = allocation_from_shares(&shares)?;
        let scores = agent_scores(&normalized, clustering);
        let ranking = (0..clustering.ell())
            .map(|c| rank_by_score(clustering.members(c), &scores))
            .collect();
        Ok(DollarPartitionPlan {
            k,
            cluster_shares,
            shares,
            distribution,
            scores,
            ranking,
        })
    }

    fn everyone_selected(&self) -> bool {
        self.k == self.ranking.iter().map(Vec::len).sum::<usize>()
    }

    /// Winners for a realized allocation.
    pub fn winners_for(&self, allocation: &NiceAllocation) -> Result<BTreeSet<AgentId>> {
        let mut winners = BTreeSet::new();
        for (c, (&t, members)) in allocation.quotas.iter().zip(&self.ranking).enumerate() {
            if t > members.len() {
                return Err(Error::ClusterOverflow {
                    cluster: c,
                    quota: t,
                    size: members.len(),
                });
            }
            winners.extend(members.iter().take(t).copied());
        }
        Ok(winners)
    }

    /// Exact probability that each agent is selected.
    pub fn selection_probabilities(&self) -> Result<BTreeMap<AgentId, S>> {
        let mut probs = BTreeMap::new();
        if self.everyone_selected() {
            for agent in self.ranking.iter().flatten() {
                probs.insert(*agent, S::one());
            }
            return Ok(probs);
        }
        for (allocation, _) in self.distribution.support() {
            // surfaces any overflow before probabilities are reported
            self.winners_for(allocation)?;
        }
        for (c, members) in self.ranking.iter().enumerate() {
            for (rank0, agent) in members.iter().enumerate() {
                let p = self
                    .distribution
                    .probability_where(|a| a.quotas[c] > rank0);
                probs.insert(*agent, p);
            }
        }
        Ok(probs)
    }
}

/// Runs exact dollar partition with a seeded allocation draw.
///
/// When `k = n` every agent is selected without consulting the lottery.
pub fn exact_dollar_partition<S: Scalar>(
    profile: &ReviewProfile<S>,
    clustering: &Clustering,
    assignment: &ReviewAssignment,
    k: usize,
    seed: Seed,
) -> Result<SelectionOutcome<S>> {
    let plan = DollarPartitionPlan::build(profile, clustering, assignment, k)?;
    if plan.everyone_selected() {
        let mut outcome = SelectionOutcome::from_winners((0..profile.n()).map(AgentId).collect());
        outcome.distribution = Some(plan.distribution);
        return Ok(outcome);
    }
    let allocation = sample_allocation(&plan.distribution, seed);
    let winners = plan.winners_for(&allocation)?;
    let mut outcome = SelectionOutcome::from_winners(winners);
    outcome.realized_allocation = Some(allocation);
    outcome.distribution = Some(plan.distribution);
    Ok(outcome)
}

/// Exact selection probability of every agent under exact dollar partition.
pub fn edp_selection_probabilities<S: Scalar>(
    profile: &ReviewProfile<S>,
    clustering: &Clustering,
    assignment: &ReviewAssignment,
    k: usize,
) -> Result<BTreeMap<AgentId, S>> {
    DollarPartitionPlan::build(profile, clustering, assignment, k)?.selection_probabilities()
}
