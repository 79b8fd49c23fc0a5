//! Randomized axiom suites, sized by the caller.

use std::collections::BTreeMap;

use num_traits::Zero;
use peerselect::mechanisms::DollarPartitionPlan;
use peerselect::{AgentId, Clustering, ExactProfile, Rational, ReviewAssignment};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{random_instance, random_row, ratio, seeded, RandomInstance};

#[derive(Debug, Default)]
pub struct SuiteReport {
    pub cases: usize,
    pub violations: usize,
    pub first_failure: Option<String>,
}

impl SuiteReport {
    fn fail(&mut self, msg: String) {
        self.violations += 1;
        self.first_failure.get_or_insert(msg);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }
}

fn plan(profile: &ExactProfile, clustering: &Clustering, assignment: &ReviewAssignment, k: usize) -> DollarPartitionPlan {
    DollarPartitionPlan::build(profile, clustering, assignment, k).expect("valid random instance")
}

fn probabilities(p: &DollarPartitionPlan) -> BTreeMap<AgentId, Rational> {
    p.selection_probabilities().expect("k within smallest cluster")
}

/// Unilateral deviations leave the deviator's probability and its cluster's
/// share untouched; cluster probability mass equals the cluster's share.
pub fn strategyproofness(cases: usize, seed: u64) -> SuiteReport {
    let mut rng = seeded(seed);
    let mut report = SuiteReport::default();
    for case in 0..cases {
        let inst = random_instance(&mut rng, 24);
        let i = rng.gen_range(0..inst.profile.n());
        let before = plan(&inst.profile, &inst.clustering, &inst.assignment, inst.k);
        let p_before = probabilities(&before);
        let c = inst.clustering.cluster_of(AgentId(i));

        for j in 0..inst.clustering.ell() {
            let mass: Rational = inst.clustering.members(j).iter().map(|a| p_before[a].clone()).sum();
            if mass != before.shares.shares()[j] {
                report.fail(format!("case {case}: cluster {j} mass {mass} != share"));
            }
        }

        let mut deviated = inst.profile.clone();
        deviated.replace_row(AgentId(i), random_row(&mut rng, &inst.assignment, i)).unwrap();
        let after = plan(&deviated, &inst.clustering, &inst.assignment, inst.k);
        let p_after = probabilities(&after);
        if p_after[&AgentId(i)] != p_before[&AgentId(i)] {
            report.fail(format!(
                "case {case}: agent {i} moved from {} to {}",
                p_before[&AgentId(i)],
                p_after[&AgentId(i)]
            ));
        }
        if after.shares.shares()[c] != before.shares.shares()[c] {
            report.fail(format!("case {case}: share of cluster {c} changed"));
        }
        report.cases += 1;
    }
    report
}

/// Normalized row of `r` as raw scores: the row itself, or `1/m` each when
/// the reviewer gave nothing.
fn effective_row(profile: &ExactProfile, assignment: &ReviewAssignment, r: usize) -> BTreeMap<AgentId, Rational> {
    let assigned = assignment.reviewees(AgentId(r));
    let total: Rational = profile.row(AgentId(r)).values().cloned().sum();
    assigned
        .iter()
        .map(|&j| {
            let v = if total.is_zero() {
                ratio(1, assigned.len() as i64)
            } else {
                profile.score(AgentId(r), j).cloned().unwrap_or_else(Rational::zero) / &total
            };
            (j, v)
        })
        .collect()
}

/// Reinforcing an agent never lowers its selection probability.
pub fn monotonicity(cases: usize, seed: u64) -> SuiteReport {
    let mut rng = seeded(seed);
    let mut report = SuiteReport::default();
    while report.cases < cases {
        let inst = random_instance(&mut rng, 24);
        let i = rng.gen_range(0..inst.profile.n());
        let reviewers = inst.assignment.reviewers_of(AgentId(i));
        let Some(&r) = reviewers.choose(&mut rng) else {
            continue;
        };
        let p_before = probabilities(&plan(&inst.profile, &inst.clustering, &inst.assignment, inst.k));

        // raise r's value for i, scale r's other values down
        let mut row = effective_row(&inst.profile, &inst.assignment, r.0);
        let boost = ratio(rng.gen_range(1..=50), rng.gen_range(1..=20));
        let shrink = ratio(rng.gen_range(0..=10), 10);
        for (j, v) in row.iter_mut() {
            if j.0 == i {
                *v += &boost;
            } else {
                *v *= &shrink;
            }
        }
        let mut reinforced = inst.profile.clone();
        reinforced.replace_row(r, row).unwrap();
        let p_after = probabilities(&plan(&reinforced, &inst.clustering, &inst.assignment, inst.k));
        if p_after[&AgentId(i)] < p_before[&AgentId(i)] {
            report.fail(format!(
                "case {}: agent {i} dropped from {} to {}",
                report.cases,
                p_before[&AgentId(i)],
                p_after[&AgentId(i)]
            ));
        }
        report.cases += 1;
    }
    report
}

/// Raising the target never lowers any probability or any quota.
pub fn committee_monotonicity(cases: usize, seed: u64) -> SuiteReport {
    let mut rng = seeded(seed);
    let mut report = SuiteReport::default();
    while report.cases < cases {
        let inst = random_instance(&mut rng, 24);
        if inst.k + 1 > inst.clustering.min_size() {
            continue;
        }
        let small = plan(&inst.profile, &inst.clustering, &inst.assignment, inst.k);
        let large = plan(&inst.profile, &inst.clustering, &inst.assignment, inst.k + 1);
        let (ps, pl) = (probabilities(&small), probabilities(&large));
        for (a, p) in &ps {
            if pl[a] < *p {
                report.fail(format!("case {}: agent {a} fell from {p} to {}", report.cases, pl[a]));
            }
        }
        for (j, (s, l)) in small.shares.shares().iter().zip(large.shares.shares()).enumerate() {
            if l < s {
                report.fail(format!("case {}: quota {j} fell", report.cases));
            }
        }
        report.cases += 1;
    }
    report
}

fn has_score_ties(p: &DollarPartitionPlan, clustering: &Clustering) -> bool {
    (0..clustering.ell()).any(|c| {
        let m = clustering.members(c);
        m.iter().enumerate().any(|(x, a)| m[x + 1..].iter().any(|b| p.scores[a.0] == p.scores[b.0]))
    })
}

/// Relabelling agents relabels their probabilities. Instances with score
/// ties inside a cluster are skipped since the id tie-break is not anonymous.
pub fn anonymity(cases: usize, seed: u64) -> SuiteReport {
    let mut rng = seeded(seed);
    let mut report = SuiteReport::default();
    while report.cases < cases {
        let RandomInstance { profile, clustering, assignment, k } = random_instance(&mut rng, 16);
        let base = plan(&profile, &clustering, &assignment, k);
        if has_score_ties(&base, &clustering) {
            continue;
        }
        let mut perm: Vec<usize> = (0..profile.n()).collect();
        perm.shuffle(&mut rng);
        let moved = plan(&profile.permuted(&perm), &clustering.permuted(&perm), &assignment.permuted(&perm), k);
        let (p, q) = (probabilities(&base), probabilities(&moved));
        for (a, v) in &p {
            if q[&AgentId(perm[a.0])] != *v {
                report.fail(format!("case {}: agent {a} not relabelled consistently", report.cases));
            }
        }
        report.cases += 1;
    }
    report
}

/// A coalition inside one cluster cannot move any member's probability.
pub fn cluster_coalitions(cases: usize, seed: u64) -> SuiteReport {
    let mut rng = seeded(seed);
    let mut report = SuiteReport::default();
    while report.cases < cases {
        let inst = random_instance(&mut rng, 24);
        let c = rng.gen_range(0..inst.clustering.ell());
        let members = inst.clustering.members(c);
        let size = members.len().min(3);
        let coalition: Vec<AgentId> = members.choose_multiple(&mut rng, size).copied().collect();
        let before = probabilities(&plan(&inst.profile, &inst.clustering, &inst.assignment, inst.k));
        let mut deviated = inst.profile.clone();
        for a in &coalition {
            deviated.replace_row(*a, random_row(&mut rng, &inst.assignment, a.0)).unwrap();
        }
        let after = probabilities(&plan(&deviated, &inst.clustering, &inst.assignment, inst.k));
        for a in &coalition {
            if before[a] != after[a] {
                report.fail(format!("case {}: coalition member {a} moved", report.cases));
            }
        }
        report.cases += 1;
    }
    report
}

