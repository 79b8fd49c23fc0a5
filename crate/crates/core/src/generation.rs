//! Synthetic instances: reference order, Mallows noise, clusters, balanced
//! review assignments and Borda profiles.

use std::collections::BTreeSet;

use petgraph::algo::dinics;
use petgraph::Graph;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{AgentId, Clustering, ReviewAssignment, ReviewProfile};
use crate::scalar::Scalar;
use crate::seed::Seed;

/// Reference order over agents, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    sigma: Vec<AgentId>,
}

impl GroundTruth {
    pub fn new(sigma: Vec<AgentId>) -> Result<Self> {
        let n = sigma.len();
        let mut seen = vec![false; n];
        for a in &sigma {
            if a.0 >= n || std::mem::replace(&mut seen[a.0], true) {
                return Err(Error::InvalidParameter(format!(
                    "reference order is not a permutation of 0..{n}"
                )));
            }
        }
        Ok(GroundTruth { sigma })
    }

    pub fn identity(n: usize) -> Self {
        GroundTruth {
            sigma: (0..n).map(AgentId).collect(),
        }
    }

    /// Uniformly random order.
    pub fn random(n: usize, seed: Seed) -> Self {
        let mut sigma: Vec<AgentId> = (0..n).map(AgentId).collect();
        sigma.shuffle(&mut seed.rng());
        GroundTruth { sigma }
    }

    pub fn sigma(&self) -> &[AgentId] {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }
}

/// Mallows dispersion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MallowsParams {
    phi: f64,
}

impl MallowsParams {
    pub fn new(phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "dispersion {phi} outside [0, 1]"
            )));
        }
        Ok(MallowsParams { phi })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// One Mallows ranking by repeated insertion.
pub fn mallows_sample(sigma: &GroundTruth, params: MallowsParams, seed: Seed) -> Vec<AgentId> {
    mallows_sample_with(sigma, params, &mut seed.rng())
}

/// Repeated insertion: the element at reference position `j` lands at
/// position `i <= j` with weight `phi^(j - i)`.
pub fn mallows_sample_with<R: Rng + ?Sized>(
    sigma: &GroundTruth,
    params: MallowsParams,
    rng: &mut R,
) -> Vec<AgentId> {
    let mut ranking = Vec::with_capacity(sigma.len());
    for (j, &agent) in sigma.sigma.iter().enumerate() {
        let back = insertion_offset(j, params.phi, rng);
        ranking.insert(j - back, agent);
    }
    ranking
}

/// Draws `d` in `0..=j` with probability proportional to `phi^d`.
fn insertion_offset<R: Rng + ?Sized>(j: usize, phi: f64, rng: &mut R) -> usize {
    if j == 0 || phi == 0.0 {
        return 0;
    }
    if phi == 1.0 {
        return rng.gen_range(0..=j);
    }
    // inverse CDF of a geometric law truncated to 0..=j
    let u: f64 = rng.gen();
    let tail = phi.powi(j as i32 + 1);
    let d = ((1.0 - u * (1.0 - tail)).ln() / phi.ln()).floor();
    (d.max(0.0) as usize).min(j)
}

/// Shuffles agents and deals them round-robin into `ell` clusters.
pub fn make_clustering(n: usize, ell: usize, seed: Seed) -> Result<Clustering> {
    if ell == 0 || ell > n {
        return Err(Error::InvalidParameter(format!(
            "cannot split {n} agents into {ell} clusters"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed.rng());
    let mut cluster_of = vec![0; n];
    for (pos, &agent) in order.iter().enumerate() {
        cluster_of[agent] = pos % ell;
    }
    Clustering::new(ell, cluster_of)
}

/// Random assignment in which every agent reviews exactly `m` agents outside
/// its cluster and is reviewed exactly `m` times.
///
/// Each reviewer's `m` reviews are spread over the foreign clusters as evenly
/// as the cluster sizes allow (within one of `m / (ell - 1)` when possible).
pub fn balanced_assignment(clustering: &Clustering, m: usize, seed: Seed) -> Result<ReviewAssignment> {
    let n = clustering.n();
    let ell = clustering.ell();
    if m == 0 {
        return ReviewAssignment::new(0, vec![BTreeSet::new(); n]);
    }
    if ell < 2 || m > n - clustering.max_size() {
        return Err(Error::Infeasible(format!(
            "m = {m} reviews per agent do not fit outside the largest cluster ({n} agents, {ell} clusters)"
        )));
    }
    let mut rng = seed.rng();
    let target = m as f64 / (ell - 1) as f64;
    let tight = (target.floor() as usize, target.ceil() as usize);
    let loose = (tight.0.saturating_sub(1), tight.1 + 1);
    let counts = [tight, loose]
        .into_iter()
        .find_map(|bounds| review_counts(clustering, m, bounds, &mut rng))
        .ok_or_else(|| {
            Error::Infeasible(format!(
                "no {m}-regular assignment exists for cluster sizes {:?}",
                clustering.sizes()
            ))
        })?;

    let mut reviews = vec![BTreeSet::new(); n];
    for c in 0..ell {
        let mut members = clustering.members(c).to_vec();
        members.shuffle(&mut rng);
        let mut reviewers: Vec<usize> = (0..n).filter(|&i| counts[i][c] > 0).collect();
        reviewers.shuffle(&mut rng);
        let mut slot = 0;
        for i in reviewers {
            for _ in 0..counts[i][c] {
                reviews[i].insert(members[slot % members.len()]);
                slot += 1;
            }
        }
    }
    ReviewAssignment::new(m, reviews)
}

/// How many reviews each reviewer sends into each cluster, via max flow with
/// per-entry bounds. `None` if the bounds admit no solution.
fn review_counts<R: Rng + ?Sized>(
    clustering: &Clustering,
    m: usize,
    (lo, hi): (usize, usize),
    rng: &mut R,
) -> Option<Vec<Vec<usize>>> {
    let n = clustering.n();
    let ell = clustering.ell();
    let sizes = clustering.sizes();
    let upper = |i: usize, c: usize| -> usize {
        if clustering.cluster_of(AgentId(i)) == c {
            0
        } else {
            hi.min(sizes[c])
        }
    };
    let lower = |i: usize, c: usize| -> usize {
        if clustering.cluster_of(AgentId(i)) == c {
            0
        } else {
            lo
        }
    };

    let mut counts = vec![vec![0usize; ell]; n];
    let mut inflow = vec![0usize; ell];
    for i in 0..n {
        for c in 0..ell {
            if lower(i, c) > upper(i, c) {
                return None;
            }
            counts[i][c] = lower(i, c);
            inflow[c] += counts[i][c];
        }
        if counts[i].iter().sum::<usize>() > m {
            return None;
        }
    }
    if inflow.iter().zip(&sizes).any(|(&f, &s)| f > m * s) {
        return None;
    }

    let mut net: Graph<(), usize> = Graph::new();
    let source = net.add_node(());
    let sink = net.add_node(());
    let reviewer_nodes: Vec<_> = (0..n).map(|_| net.add_node(())).collect();
    let cluster_nodes: Vec<_> = (0..ell).map(|_| net.add_node(())).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = vec![vec![None; ell]; n];
    for &i in &order {
        net.add_edge(source, reviewer_nodes[i], m - counts[i].iter().sum::<usize>());
        let mut cs: Vec<usize> = (0..ell).collect();
        cs.shuffle(rng);
        for c in cs {
            let room = upper(i, c) - counts[i][c];
            if room > 0 {
                edges[i][c] = Some(net.add_edge(reviewer_nodes[i], cluster_nodes[c], room));
            }
        }
    }
    let mut demand = 0;
    for c in 0..ell {
        let need = m * sizes[c] - inflow[c];
        demand += need;
        net.add_edge(cluster_nodes[c], sink, need);
    }
    let (total, flows) = dinics(&net, source, sink);
    if total != demand {
        return None;
    }
    for i in 0..n {
        for c in 0..ell {
            if let Some(e) = edges[i][c] {
                counts[i][c] += flows[e.index()];
            }
        }
    }
    Some(counts)
}

/// Borda scores: each reviewer ranks its assignees by its own full ranking
/// and gives `m - rank` (best gets `m`, worst gets 1).
pub fn borda_profile<S: Scalar>(
    rankings: &[Vec<AgentId>],
    assignment: &ReviewAssignment,
) -> Result<ReviewProfile<S>> {
    let n = assignment.n();
    if rankings.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} rankings for {n} agents",
            rankings.len()
        )));
    }
    let mut profile = ReviewProfile::new(n);
    let mut position = vec![usize::MAX; n];
    for (i, ranking) in rankings.iter().enumerate() {
        position.fill(usize::MAX);
        for (pos, a) in ranking.iter().enumerate() {
            if a.0 < n {
                position[a.0] = pos;
            }
        }
        let mut assignees: Vec<AgentId> = assignment.reviewees(AgentId(i)).iter().copied().collect();
        if let Some(missing) = assignees.iter().find(|a| position[a.0] == usize::MAX) {
            return Err(Error::InvalidParameter(format!(
                "ranking of agent {i} does not mention assignee {missing}"
            )));
        }
        assignees.sort_by_key(|a| position[a.0]);
        let m = assignees.len();
        for (rank, j) in assignees.into_iter().enumerate() {
            profile.set(AgentId(i), j, S::from_usize(m - rank))?;
        }
    }
    Ok(profile)
}

/// A generated experiment instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S> {
    pub profile: ReviewProfile<S>,
    pub clustering: Clustering,
    pub assignment: ReviewAssignment,
    pub ground_truth: GroundTruth,
}

/// Clustering, assignment, one shared reference order and one Mallows
/// ranking per agent, scored by Borda.
pub fn generate_instance<S: Scalar>(
    n: usize,
    m: usize,
    ell: usize,
    phi: f64,
    seed: Seed,
) -> Result<Instance<S>> {
    let params = MallowsParams::new(phi)?;
    let clustering = make_clustering(n, ell, seed.derive(&[1]))?;
    let assignment = balanced_assignment(&clustering, m, seed.derive(&[2]))?;
    let ground_truth = GroundTruth::random(n, seed.derive(&[3]));
    let rankings: Vec<Vec<AgentId>> = (0..n)
        .map(|i| mallows_sample(&ground_truth, params, seed.derive(&[4, i as u64])))
        .collect();
    let profile = borda_profile(&rankings, &assignment)?;
    Ok(Instance {
        profile,
        clustering,
        assignment,
        ground_truth,
    })
}
