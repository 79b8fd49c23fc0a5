//! Raw-score mechanisms: vanilla, partition and credible subset.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{
    validate_instance, AgentId, Clustering, CredibleSets, ReviewAssignment, ReviewProfile,
    SelectionOutcome, ValidationMode,
};
use crate::scalar::Scalar;
use crate::seed::Seed;

use super::{check_k, outranks, rank_by_score, top_k};

/// The `k` agents with the highest total raw score.
pub fn vanilla<S: Scalar>(profile: &ReviewProfile<S>, k: usize) -> Result<SelectionOutcome<S>> {
    check_k(k, profile.n())?;
    Ok(SelectionOutcome::from_winners(top_k(&profile.incoming_totals(), k)))
}

/// Fixed per-cluster quotas: `floor(k/ell)`, plus one for the first
/// `k mod ell` clusters.
pub fn partition_quotas(k: usize, ell: usize) -> Vec<usize> {
    (0..ell)
        .map(|c| k / ell + usize::from(c < k % ell))
        .collect()
}

/// Selects a preset number of agents from each cluster, ranked by raw
/// scores from reviewers outside the cluster.
pub fn partition_mechanism<S: Scalar>(
    profile: &ReviewProfile<S>,
    clustering: &Clustering,
    assignment: &ReviewAssignment,
    k: usize,
) -> Result<SelectionOutcome<S>> {
    check_k(k, profile.n())?;
    validate_instance(profile, clustering, assignment, k, ValidationMode::Lenient).into_result()?;
    let mut scores = vec![S::zero(); profile.n()];
    for (i, j, s) in profile.entries() {
        if !clustering.same_cluster(i, j) {
            scores[j.0] = scores[j.0].clone() + s.clone();
        }
    }
    let mut winners = BTreeSet::new();
    for (c, quota) in partition_quotas(k, clustering.ell()).into_iter().enumerate() {
        let members = clustering.members(c);
        if quota > members.len() {
            return Err(Error::ClusterOverflow {
                cluster: c,
                quota,
                size: members.len(),
            });
        }
        winners.extend(rank_by_score(members, &scores).into_iter().take(quota));
    }
    Ok(SelectionOutcome::from_winners(winners))
}

/// Top-k set `T` and potential entrants `P`: agents outside `T` that reach
/// the top k once their own outgoing scores are zeroed (no renormalization).
pub fn credible_sets<S: Scalar>(profile: &ReviewProfile<S>, k: usize) -> CredibleSets {
    let scores = profile.incoming_totals();
    let top = top_k(&scores, k);
    let n = profile.n();
    let mut potential = BTreeSet::new();
    for i in (0..n).map(AgentId) {
        if top.contains(&i) {
            continue;
        }
        let row = profile.row(i);
        let own = &scores[i.0];
        let mut above = 0usize;
        for j in (0..n).map(AgentId).filter(|&j| j != i) {
            let adjusted = match row.get(&j) {
                Some(v) => scores[j.0].clone() - v.clone(),
                None => scores[j.0].clone(),
            };
            if outranks(j, &adjusted, i, own) {
                above += 1;
                if above >= k {
                    break;
                }
            }
        }
        if above < k {
            potential.insert(i);
        }
    }
    CredibleSets { top, potential }
}

/// Credible subset: with probability `(k + |P|) / (k + m)` a uniformly random
/// k-subset of `T ∪ P`, otherwise nobody.
pub fn credible_subset<S: Scalar>(
    profile: &ReviewProfile<S>,
    assignment: &ReviewAssignment,
    k: usize,
    seed: Seed,
) -> Result<SelectionOutcome<S>> {
    check_k(k, profile.n())?;
    let m = assignment.m();
    let sets = credible_sets(profile, k);
    let entrants = sets.potential.len();
    if entrants > m {
        return Err(Error::Internal(format!(
            "{entrants} potential entrants exceed m = {m}"
        )));
    }
    let denom = k + m;
    let select_weight = k + entrants;
    let abstain = if denom == 0 {
        S::zero()
    } else {
        S::from_usize(denom - select_weight) / S::from_usize(denom)
    };

    let mut rng = seed.rng();
    let selects = denom == 0 || rng.gen_range(0..denom) < select_weight;
    let winners = if selects {
        let pool: Vec<AgentId> = sets.top.union(&sets.potential).copied().collect();
        index::sample(&mut rng, pool.len(), k)
            .into_iter()
            .map(|idx| pool[idx])
            .collect()
    } else {
        BTreeSet::new()
    };
    let mut outcome = SelectionOutcome::from_winners(winners);
    outcome.credible_sets = Some(sets);
    outcome.abstention_probability = Some(abstain);
    Ok(outcome)
}
