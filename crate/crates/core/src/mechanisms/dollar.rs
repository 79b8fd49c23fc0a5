//! Dollar raffle, dollar partition raffle and top dollar.
//!
//! None of these is strategyproof for k > 1; they exist as comparison points.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{
    validate_instance, AgentId, Clustering, ReviewAssignment, ReviewProfile, SelectionOutcome,
    ValidationMode,
};
use crate::scalar::Scalar;
use crate::seed::Seed;

use super::dollar_partition::{agent_scores, cluster_shares, normalize};
use super::{check_k, rank_by_score, top_k};

/// Dollar share of every agent, indexed by id.
///
/// Each reviewer's scores are scaled to sum to `1/n`. A reviewer with no
/// positive score splits `1/n` evenly over its assigned reviewees, or over
/// every other agent when no assignment is given.
pub fn dollar_shares<S: Scalar>(
    profile: &ReviewProfile<S>,
    assignment: Option<&ReviewAssignment>,
) -> Vec<S> {
    shares_with_default(profile, assignment, true)
}

fn shares_with_default<S: Scalar>(
    profile: &ReviewProfile<S>,
    assignment: Option<&ReviewAssignment>,
    default_uniform: bool,
) -> Vec<S> {
    let n = profile.n();
    let mut shares = vec![S::zero(); n];
    if n == 0 {
        return shares;
    }
    let n_s = S::from_usize(n);
    for i in (0..n).map(AgentId) {
        let row = profile.row(i);
        let total = row.values().fold(S::zero(), |acc, v| acc + v.clone());
        if !total.is_negligible() {
            let scale = total * n_s.clone();
            for (j, v) in row {
                shares[j.0] = shares[j.0].clone() + v.clone() / scale.clone();
            }
            continue;
        }
        if !default_uniform {
            continue;
        }
        let targets: Vec<AgentId> = match assignment {
            Some(a) => a.reviewees(i).iter().copied().collect(),
            None => (0..n).map(AgentId).filter(|&j| j != i).collect(),
        };
        if targets.is_empty() {
            continue;
        }
        let each = S::one() / (S::from_usize(targets.len()) * n_s.clone());
        for j in targets {
            shares[j.0] = shares[j.0].clone() + each.clone();
        }
    }
    shares
}

/// Draws agents by dollar share until `k` distinct agents are chosen, removing
/// each winner and renormalizing. If the positive shares run out, the rest
/// are filled by ascending id.
pub fn dollar_raffle<S: Scalar>(
    profile: &ReviewProfile<S>,
    assignment: Option<&ReviewAssignment>,
    k: usize,
    seed: Seed,
) -> Result<SelectionOutcome<S>> {
    check_k(k, profile.n())?;
    let mut weights = dollar_shares(profile, assignment);
    let mut rng = seed.rng();
    let mut winners = BTreeSet::new();
    while winners.len() < k {
        match S::sample_index(&weights, &mut rng) {
            Some(i) => {
                winners.insert(AgentId(i));
                weights[i] = S::zero();
            }
            None => break,
        }
    }
    for i in (0..profile.n()).map(AgentId) {
        if winners.len() >= k {
            break;
        }
        winners.insert(i);
    }
    Ok(SelectionOutcome::from_winners(winners))
}

/// Draws clusters by dollar share; each draw admits the best remaining member
/// of that cluster. Exhausted clusters drop out. If every remaining cluster
/// has zero share the draw is uniform over them.
pub fn dollar_partition_raffle<S: Scalar>(
    profile: &ReviewProfile<S>,
    clustering: &Clustering,
    assignment: &ReviewAssignment,
    k: usize,
    seed: Seed,
) -> Result<SelectionOutcome<S>> {
    check_k(k, profile.n())?;
    if clustering.ell() < 2 {
        return Err(Error::InvalidParameter(
            "dollar partition raffle needs at least two clusters".into(),
        ));
    }
    validate_instance(profile, clustering, assignment, k, ValidationMode::Lenient).into_result()?;
    let normalized = normalize(profile, assignment)?;
    let (shares, _) = cluster_shares(&normalized, clustering, k)?;
    let scores = agent_scores(&normalized, clustering);
    let rankings: Vec<Vec<AgentId>> = (0..clustering.ell())
        .map(|c| rank_by_score(clustering.members(c), &scores))
        .collect();

    let mut next = vec![0usize; clustering.ell()];
    let mut weights = shares.x;
    let mut rng = seed.rng();
    let mut winners = BTreeSet::new();
    while winners.len() < k {
        let open: Vec<usize> = (0..rankings.len())
            .filter(|&c| next[c] < rankings[c].len())
            .collect();
        let c = match S::sample_index(&weights, &mut rng) {
            Some(c) => c,
            None => {
                use rand::seq::SliceRandom;
                *open
                    .choose(&mut rng)
                    .ok_or_else(|| Error::Internal("all clusters exhausted".into()))?
            }
        };
        winners.insert(rankings[c][next[c]]);
        next[c] += 1;
        if next[c] == rankings[c].len() {
            weights[c] = S::zero();
        }
    }
    Ok(SelectionOutcome::from_winners(winners))
}

/// The `k` agents with the largest dollar shares. A silent reviewer
/// contributes nothing here, matching the other raw-score mechanisms.
pub fn top_dollar<S: Scalar>(
    profile: &ReviewProfile<S>,
    assignment: Option<&ReviewAssignment>,
    k: usize,
) -> Result<SelectionOutcome<S>> {
    check_k(k, profile.n())?;
    let shares = shares_with_default(profile, assignment, false);
    Ok(SelectionOutcome::from_winners(top_k(&shares, k)))
}
