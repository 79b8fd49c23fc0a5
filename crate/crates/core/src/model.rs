//! Domain data shared by all mechanisms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::Rational;

/// Dense agent index in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for AgentId {
    fn from(value: usize) -> Self {
        AgentId(value)
    }
}

/// Sparse raw valuations: reviewer -> (reviewee -> score).
///
/// Every reviewer has a row; an empty row is an agent that submitted nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewProfile<S = Rational> {
    rows: Vec<BTreeMap<AgentId, S>>,
}

impl<S: Scalar> ReviewProfile<S> {
    /// A profile of `n` agents with no reviews.
    pub fn new(n: usize) -> Self {
        ReviewProfile {
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn from_entries<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, S)>,
    {
        let mut profile = Self::new(n);
        for (reviewer, reviewee, score) in entries {
            profile.set(AgentId(reviewer), AgentId(reviewee), score)?;
        }
        Ok(profile)
    }

    pub fn set(&mut self, reviewer: AgentId, reviewee: AgentId, score: S) -> Result<()> {
        let n = self.n();
        if reviewer.0 >= n || reviewee.0 >= n {
            return Err(Error::InvalidParameter(format!(
                "review {reviewer}->{reviewee} references an agent outside 0..{n}"
            )));
        }
        if reviewer == reviewee {
            return Err(Error::InvalidParameter(format!("agent {reviewer} reviews itself")));
        }
        if score.is_negative() {
            return Err(Error::InvalidParameter(format!(
                "negative score {score} from {reviewer} to {reviewee}"
            )));
        }
        self.rows[reviewer.0].insert(reviewee, score);
        Ok(())
    }

    /// Replaces one reviewer's whole report.
    pub fn replace_row(&mut self, reviewer: AgentId, row: BTreeMap<AgentId, S>) -> Result<()> {
        self.rows[reviewer.0].clear();
        for (reviewee, score) in row {
            self.set(reviewer, reviewee, score)?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, reviewer: AgentId) -> &BTreeMap<AgentId, S> {
        &self.rows[reviewer.0]
    }

    pub fn score(&self, reviewer: AgentId, reviewee: AgentId) -> Option<&S> {
        self.rows[reviewer.0].get(&reviewee)
    }

    /// All `(reviewer, reviewee, score)` triples in reviewer-major order.
    pub fn entries(&self) -> impl Iterator<Item = (AgentId, AgentId, &S)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter().map(move |(j, s)| (AgentId(i), *j, s))
        })
    }

    /// Sum of raw incoming scores per agent.
    pub fn incoming_totals(&self) -> Vec<S> {
        let mut totals = vec![S::zero(); self.n()];
        for (_, j, s) in self.entries() {
            totals[j.0] = totals[j.0].clone() + s.clone();
        }
        totals
    }

    /// Returns the same profile with agents relabelled by `perm` (old -> new).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::new(self.n());
        for (i, j, s) in self.entries() {
            out.rows[perm[i.0]].insert(AgentId(perm[j.0]), s.clone());
        }
        out
    }
}

/// Partition of the agents into `ell` clusters whose sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    ell: usize,
    cluster_of: Vec<usize>,
    members: Vec<Vec<AgentId>>,
}

impl Clustering {
    pub fn new(ell: usize, cluster_of: Vec<usize>) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParameter("a clustering needs at least one cluster".into()));
        }
        let mut members = vec![Vec::new(); ell];
        for (agent, &c) in cluster_of.iter().enumerate() {
            if c >= ell {
                return Err(Error::InvalidParameter(format!(
                    "agent {agent} assigned to cluster {c}, but there are only {ell}"
                )));
            }
            members[c].push(AgentId(agent));
        }
        let max = members.iter().map(Vec::len).max().unwrap_or(0);
        let min = members.iter().map(Vec::len).min().unwrap_or(0);
        if max - min > 1 {
            return Err(Error::InvalidParameter(format!(
                "cluster sizes range from {min} to {max}; they may differ by at most one"
            )));
        }
        Ok(Clustering {
            ell,
            cluster_of,
            members,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn n(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn cluster_of(&self, agent: AgentId) -> usize {
        self.cluster_of[agent.0]
    }

    /// Members of cluster `c` in ascending id order.
    pub fn members(&self, c: usize) -> &[AgentId] {
        &self.members[c]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn min_size(&self) -> usize {
        self.members.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_size(&self) -> usize {
        self.members.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn same_cluster(&self, a: AgentId, b: AgentId) -> bool {
        self.cluster_of[a.0] == self.cluster_of[b.0]
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut cluster_of = vec![0; self.n()];
        for (old, &c) in self.cluster_of.iter().enumerate() {
            cluster_of[perm[old]] = c;
        }
        Clustering::new(self.ell, cluster_of).expect("relabelling keeps sizes")
    }
}

/// Who reviews whom. `m` is the intended number of reviews per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewAssignment {
    m: usize,
    reviews: Vec<BTreeSet<AgentId>>,
}

impl ReviewAssignment {
    pub fn new(m: usize, reviews: Vec<BTreeSet<AgentId>>) -> Result<Self> {
        let n = reviews.len();
        for (i, set) in reviews.iter().enumerate() {
            for j in set {
                if j.0 >= n {
                    return Err(Error::InvalidParameter(format!(
                        "agent {i} assigned to review {j}, outside 0..{n}"
                    )));
                }
            }
        }
        Ok(ReviewAssignment { m, reviews })
    }

    /// Builds an assignment from the reviewees present in each profile row.
    pub fn from_profile<S: Scalar>(profile: &ReviewProfile<S>) -> Self {
        let reviews: Vec<BTreeSet<AgentId>> = (0..profile.n())
            .map(|i| profile.row(AgentId(i)).keys().copied().collect())
            .collect();
        let m = reviews.iter().map(BTreeSet::len).max().unwrap_or(0);
        ReviewAssignment { m, reviews }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.reviews.len()
    }

    pub fn reviewees(&self, reviewer: AgentId) -> &BTreeSet<AgentId> {
        &self.reviews[reviewer.0]
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n()];
        for set in &self.reviews {
            for j in set {
                deg[j.0] += 1;
            }
        }
        deg
    }

    /// Reviewers assigned to `reviewee`, ascending.
    pub fn reviewers_of(&self, reviewee: AgentId) -> Vec<AgentId> {
        (0..self.n())
            .filter(|&i| self.reviews[i].contains(&reviewee))
            .map(AgentId)
            .collect()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut reviews = vec![BTreeSet::new(); self.n()];
        for (i, set) in self.reviews.iter().enumerate() {
            reviews[perm[i]] = set.iter().map(|j| AgentId(perm[j.0])).collect();
        }
        ReviewAssignment { m: self.m, reviews }
    }
}

/// Valuations after each reviewer's assigned reviews were scaled to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedProfile<S = Rational> {
    pub(crate) rows: Vec<BTreeMap<AgentId, S>>,
}

impl<S: Scalar> NormalizedProfile<S> {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, reviewer: AgentId) -> &BTreeMap<AgentId, S> {
        &self.rows[reviewer.0]
    }

    pub fn value(&self, reviewer: AgentId, reviewee: AgentId) -> Option<&S> {
        self.rows[reviewer.0].get(&reviewee)
    }

    pub fn entries(&self) -> impl Iterator<Item = (AgentId, AgentId, &S)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter().map(move |(j, s)| (AgentId(i), *j, s))
        })
    }
}

/// Per-cluster fractional quotas summing to the target size `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareVector<S = Rational> {
    shares: Vec<S>,
    k: usize,
}

impl<S: Scalar> ShareVector<S> {
    /// Validates non-negativity and that the shares sum to an integer, which
    /// becomes `k`.
    pub fn new(shares: Vec<S>) -> Result<Self> {
        if shares.is_empty() {
            return Err(Error::InvalidShares("no shares given".into()));
        }
        if let Some((i, s)) = shares.iter().enumerate().find(|(_, s)| s.is_negative()) {
            return Err(Error::InvalidShares(format!("share {i} is negative ({s})")));
        }
        let total = scalar::sum(&shares);
        let k = total
            .to_integer()
            .filter(|k| *k >= 0)
            .ok_or_else(|| Error::InvalidShares(format!("shares sum to {total}, not an integer")))?;
        Ok(ShareVector {
            shares,
            k: k as usize,
        })
    }

    /// Like [`ShareVector::new`] but also checks the sum against `k`.
    pub fn with_target(shares: Vec<S>, k: usize) -> Result<Self> {
        let v = Self::new(shares)?;
        if v.k != k {
            return Err(Error::InvalidShares(format!(
                "shares sum to {}, expected {k}",
                v.k
            )));
        }
        Ok(v)
    }

    /// Parses comma-separated decimals such as `1.1,2.1,1.3`.
    pub fn parse(text: &str) -> Result<Self> {
        let shares = text
            .split(',')
            .map(|s| S::parse_decimal(s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(shares)
    }

    pub fn shares(&self) -> &[S] {
        &self.shares
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    pub fn floors(&self) -> Vec<usize> {
        self.shares
            .iter()
            .map(|s| s.floor().to_integer().unwrap_or(0) as usize)
            .collect()
    }

    pub fn ceils(&self) -> Vec<usize> {
        self.shares
            .iter()
            .map(|s| s.ceil().to_integer().unwrap_or(0) as usize)
            .collect()
    }
}

/// Integer quota per cluster.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NiceAllocation {
    pub quotas: Vec<usize>,
}

impl NiceAllocation {
    pub fn new(quotas: Vec<usize>) -> Self {
        NiceAllocation { quotas }
    }

    pub fn total(&self) -> usize {
        self.quotas.iter().sum()
    }

    /// Quota rule plus exact size with respect to `shares`.
    pub fn is_nice_for<S: Scalar>(&self, shares: &ShareVector<S>) -> bool {
        self.quotas.len() == shares.len()
            && self.total() == shares.k()
            && self
                .quotas
                .iter()
                .zip(shares.floors().iter().zip(shares.ceils()))
                .all(|(t, (lo, hi))| *t == *lo || *t == hi)
    }
}

impl fmt::Display for NiceAllocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.quotas.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Lottery over nice allocations.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationDistribution<S = Rational> {
    pub(crate) support: Vec<(NiceAllocation, S)>,
}

impl<S: Scalar> AllocationDistribution<S> {
    pub fn support(&self) -> &[(NiceAllocation, S)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probability_of(&self, allocation: &NiceAllocation) -> S {
        self.support
            .iter()
            .find(|(a, _)| a == allocation)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(S::zero)
    }

    /// Total probability of the allocations satisfying `pred`.
    pub fn probability_where(&self, pred: impl Fn(&NiceAllocation) -> bool) -> S {
        self.support
            .iter()
            .filter(|(a, _)| pred(a))
            .fold(S::zero(), |acc, (_, p)| acc + p.clone())
    }

    /// Highest-probability allocation, earliest on ties.
    pub fn mode(&self) -> Option<&NiceAllocation> {
        let mut best: Option<&(NiceAllocation, S)> = None;
        for entry in &self.support {
            if best.is_none_or(|b| entry.1 > b.1) {
                best = Some(entry);
            }
        }
        best.map(|(a, _)| a)
    }
}

/// Selection result of any mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome<S = Rational> {
    pub winners: BTreeSet<AgentId>,
    pub realized_allocation: Option<NiceAllocation>,
    pub distribution: Option<AllocationDistribution<S>>,
    pub selection_probabilities: Option<BTreeMap<AgentId, S>>,
    /// Credible Subset only: the top-k set and the potential entrants.
    pub credible_sets: Option<CredibleSets>,
    /// Credible Subset only: probability of returning no winners.
    pub abstention_probability: Option<S>,
}

impl<S> SelectionOutcome<S> {
    pub fn from_winners(winners: BTreeSet<AgentId>) -> Self {
        SelectionOutcome {
            winners,
            realized_allocation: None,
            distribution: None,
            selection_probabilities: None,
            credible_sets: None,
            abstention_probability: None,
        }
    }
}

/// Top-k agents by raw score and the agents that could enter the top k by
/// withholding their own reviews.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CredibleSets {
    pub top: BTreeSet<AgentId>,
    pub potential: BTreeSet<AgentId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    /// Require `k <= floor(n / ell)`.
    Strict,
    /// Only require `k <= n`.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoAgents,
    SizeMismatch {
        profile: usize,
        clustering: usize,
        assignment: usize,
    },
    EmptyCluster(usize),
    SelfReview(AgentId),
    InClusterReview {
        reviewer: AgentId,
        reviewee: AgentId,
    },
    UnassignedScore {
        reviewer: AgentId,
        reviewee: AgentId,
    },
    OutDegree {
        agent: AgentId,
        found: usize,
        expected: usize,
    },
    InDegree {
        agent: AgentId,
        found: usize,
        expected: usize,
    },
    TargetExceedsAgents { k: usize, n: usize },
    TargetExceedsSmallestCluster { k: usize, smallest: usize },
}

impl Violation {
    /// In-degree imbalance is reported but does not stop a mechanism from
    /// running.
    pub fn is_fatal(&self) -> bool {
        !matches!(self, Violation::InDegree { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "instance has no agents"),
            Violation::SizeMismatch {
                profile,
                clustering,
                assignment,
            } => write!(
                f,
                "agent counts disagree: profile {profile}, clustering {clustering}, assignment {assignment}"
            ),
            Violation::EmptyCluster(c) => write!(f, "cluster {c} is empty"),
            Violation::SelfReview(a) => write!(f, "agent {a} reviews itself"),
            Violation::InClusterReview { reviewer, reviewee } => {
                write!(f, "agent {reviewer} reviews {reviewee} in its own cluster")
            }
            Violation::UnassignedScore { reviewer, reviewee } => {
                write!(f, "agent {reviewer} scores {reviewee} without being assigned to it")
            }
            Violation::OutDegree {
                agent,
                found,
                expected,
            } => write!(f, "agent {agent} reviews {found} agents, expected {expected}"),
            Violation::InDegree {
                agent,
                found,
                expected,
            } => write!(f, "agent {agent} is reviewed {found} times, expected {expected}"),
            Violation::TargetExceedsAgents { k, n } => {
                write!(f, "target size {k} exceeds the number of agents {n}")
            }
            Violation::TargetExceedsSmallestCluster { k, smallest } => {
                write!(f, "target size {k} exceeds floor(n/ell) = {smallest}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_fatal(&self) -> bool {
        self.violations.iter().any(Violation::is_fatal)
    }

    /// `Err` when a fatal violation is present.
    pub fn into_result(self) -> Result<()> {
        if self.has_fatal() {
            Err(Error::InvalidInstance(self))
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Checks the structural preconditions shared by the partition mechanisms.
/// Violations are returned as data.
pub fn validate_instance<S: Scalar>(
    profile: &ReviewProfile<S>,
    clustering: &Clustering,
    assignment: &ReviewAssignment,
    k: usize,
    mode: ValidationMode,
) -> ValidationReport {
    let mut violations = Vec::new();
    let n = profile.n();
    if n == 0 {
        violations.push(Violation::NoAgents);
    }
    if clustering.n() != n || assignment.n() != n {
        violations.push(Violation::SizeMismatch {
            profile: n,
            clustering: clustering.n(),
            assignment: assignment.n(),
        });
        return ValidationReport { violations };
    }
    for c in 0..clustering.ell() {
        if clustering.members(c).is_empty() {
            violations.push(Violation::EmptyCluster(c));
        }
    }
    let m = assignment.m();
    for i in (0..n).map(AgentId) {
        let assigned = assignment.reviewees(i);
        if assigned.contains(&i) || profile.row(i).contains_key(&i) {
            violations.push(Violation::SelfReview(i));
        }
        for &j in assigned {
            if j != i && clustering.same_cluster(i, j) {
                violations.push(Violation::InClusterReview {
                    reviewer: i,
                    reviewee: j,
                });
            }
        }
        for &j in profile.row(i).keys() {
            if !assigned.contains(&j) {
                violations.push(Violation::UnassignedScore {
                    reviewer: i,
                    reviewee: j,
                });
            }
        }
        if assigned.len() != m {
            violations.push(Violation::OutDegree {
                agent: i,
                found: assigned.len(),
                expected: m,
            });
        }
    }
    for (j, deg) in assignment.in_degrees().into_iter().enumerate() {
        if deg != m {
            violations.push(Violation::InDegree {
                agent: AgentId(j),
                found: deg,
                expected: m,
            });
        }
    }
    if k > n {
        violations.push(Violation::TargetExceedsAgents { k, n });
    } else if mode == ValidationMode::Strict && n > 0 && k > n / clustering.ell() {
        violations.push(Violation::TargetExceedsSmallestCluster {
            k,
            smallest: n / clustering.ell(),
        });
    }
    ValidationReport { violations }
}
