//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod mallows;
pub mod suites;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use peerselect::scalar::parse_big_rational;
use peerselect::{AgentId, Clustering, ExactProfile, Rational, ReviewAssignment, Seed};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn q(text: &str) -> Rational {
    parse_big_rational(text).unwrap()
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

pub fn ratio(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

pub fn ids(v: &[usize]) -> BTreeSet<AgentId> {
    v.iter().copied().map(AgentId).collect()
}

// ---- worked example: eight agents A..H in four pairs ----

pub const NAMES: [char; 8] = ['A', 'B', 'C', 'D', 'E', 'F', 'G', 'H'];

pub fn agent(name: char) -> usize {
    NAMES.iter().position(|&c| c == name).unwrap()
}

/// Raw grades, reviewer -> (reviewee, grade).
pub const RAW_GRADES: [(char, char, &str); 16] = [
    ('A', 'D', "0"),
    ('A', 'H', "100"),
    ('B', 'C', "80"),
    ('B', 'E', "30"),
    ('C', 'A', "83"),
    ('C', 'G', "42"),
    ('D', 'B', "77"),
    ('D', 'F', "50"),
    ('E', 'D', "65"),
    ('E', 'G', "65"),
    ('F', 'B', "56"),
    ('F', 'H', "98"),
    ('G', 'A', "29"),
    ('G', 'F', "62"),
    ('H', 'C', "75"),
    ('H', 'E', "29"),
];

/// The same grades after normalization, rounded to four digits.
pub const NORMALIZED_GRADES: [(char, char, &str); 16] = [
    ('A', 'D', "0"),
    ('A', 'H', "1.00"),
    ('B', 'C', ".7272"),
    ('B', 'E', ".2728"),
    ('C', 'A', ".664"),
    ('C', 'G', ".336"),
    ('D', 'B', ".6063"),
    ('D', 'F', ".3937"),
    ('E', 'D', ".50"),
    ('E', 'G', ".50"),
    ('F', 'B', ".3636"),
    ('F', 'H', ".6364"),
    ('G', 'A', ".3187"),
    ('G', 'F', ".6813"),
    ('H', 'C', ".7212"),
    ('H', 'E', ".2788"),
];

fn profile_from(grades: &[(char, char, &str)]) -> ExactProfile {
    ExactProfile::from_entries(8, grades.iter().map(|&(i, j, s)| (agent(i), agent(j), q(s)))).unwrap()
}

pub fn example_raw_profile() -> ExactProfile {
    profile_from(&RAW_GRADES)
}

pub fn example_normalized_profile() -> ExactProfile {
    profile_from(&NORMALIZED_GRADES)
}

/// {A,B}, {C,D}, {E,F}, {G,H}.
pub fn example_clustering() -> Clustering {
    Clustering::new(4, vec![0, 0, 1, 1, 2, 2, 3, 3]).unwrap()
}

pub fn example_assignment() -> ReviewAssignment {
    let mut reviews = vec![BTreeSet::new(); 8];
    for (i, j, _) in RAW_GRADES {
        reviews[agent(i)].insert(AgentId(agent(j)));
    }
    ReviewAssignment::new(2, reviews).unwrap()
}

// ---- 18 agents in three clusters of six ----

/// Cluster 0 reviews all of cluster 1 with a slight edge to its first two
/// members; clusters 1 and 2 review all of cluster 0, backing its first four.
pub fn contrast_instance() -> (ExactProfile, Clustering, ReviewAssignment) {
    let n = 18;
    let clustering = Clustering::new(3, (0..n).map(|i| i / 6).collect()).unwrap();
    let mut profile = ExactProfile::new(n);
    let mut reviews = vec![BTreeSet::new(); n];
    for i in 0..n {
        let targets: Vec<usize> = if i < 6 { (6..12).collect() } else { (0..6).collect() };
        for j in targets {
            let score = match (i < 6, j) {
                (true, 6 | 7) => int(11),
                (true, _) => int(10),
                (false, 0..=3) => int(1),
                (false, _) => int(0),
            };
            reviews[i].insert(AgentId(j));
            profile.set(AgentId(i), AgentId(j), score).unwrap();
        }
    }
    (profile, clustering, ReviewAssignment::new(6, reviews).unwrap())
}

/// Translates 1-based labels.
pub fn one_based(v: &[usize]) -> BTreeSet<AgentId> {
    v.iter().map(|&x| AgentId(x - 1)).collect()
}

// ---- oracles ----

/// Column sums of raw scores, ranked by descending sum then id.
pub fn vanilla_oracle(profile: &ExactProfile, k: usize) -> BTreeSet<AgentId> {
    let n = profile.n();
    let mut sums = vec![Rational::zero(); n];
    for i in 0..n {
        for j in 0..n {
            if let Some(s) = profile.score(AgentId(i), AgentId(j)) {
                sums[j] += s;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sums[b].cmp(&sums[a]).then(a.cmp(&b)));
    order.into_iter().take(k).map(AgentId).collect()
}

/// Dollar shares computed directly: every reviewer hands out `1/n`, pro rata
/// to its scores, or evenly over `fallback(i)` when it gave nothing.
pub fn dollar_share_oracle(
    profile: &ExactProfile,
    fallback: impl Fn(usize) -> Vec<usize>,
) -> Vec<Rational> {
    let n = profile.n();
    let mut shares = vec![Rational::zero(); n];
    let unit = ratio(1, n as i64);
    for i in 0..n {
        let row: Vec<(usize, Rational)> = (0..n)
            .filter_map(|j| profile.score(AgentId(i), AgentId(j)).map(|s| (j, s.clone())))
            .collect();
        let total: Rational = row.iter().map(|(_, s)| s.clone()).sum();
        if total.is_zero() {
            let targets = fallback(i);
            for &j in &targets {
                shares[j] += &unit / int(targets.len() as i64);
            }
        } else {
            for (j, s) in row {
                shares[j] += &unit * s / &total;
            }
        }
    }
    shares
}

/// Exact probability that each agent is among the first `k` distinct draws
/// when agents are drawn in proportion to `weights` without replacement.
pub fn raffle_oracle(weights: &[Rational], k: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); weights.len()];
    raffle_walk(weights, &mut vec![false; weights.len()], k, Rational::one(), &mut out);
    out
}

fn raffle_walk(weights: &[Rational], taken: &mut Vec<bool>, left: usize, p: Rational, out: &mut [Rational]) {
    if left == 0 || p.is_zero() {
        return;
    }
    let total: Rational = (0..weights.len()).filter(|&i| !taken[i]).map(|i| weights[i].clone()).sum();
    if total.is_zero() {
        // lowest free ids fill the rest
        let free: Vec<usize> = (0..weights.len()).filter(|&i| !taken[i]).take(left).collect();
        for i in free {
            out[i] += &p;
        }
        return;
    }
    for i in 0..weights.len() {
        if taken[i] || weights[i].is_zero() {
            continue;
        }
        let pi = &p * &weights[i] / &total;
        out[i] += &pi;
        taken[i] = true;
        raffle_walk(weights, taken, left - 1, pi, out);
        taken[i] = false;
    }
}

/// Exact selection probabilities of the cluster raffle: clusters are drawn in
/// proportion to `weights`, each draw admits the next agent of `rankings[c]`,
/// and exhausted clusters leave the draw.
pub fn cluster_raffle_oracle(weights: &[Rational], rankings: &[Vec<usize>], k: usize) -> BTreeMap<usize, Rational> {
    let mut out: BTreeMap<usize, Rational> = rankings.iter().flatten().map(|&a| (a, Rational::zero())).collect();
    let mut next = vec![0usize; rankings.len()];
    cluster_walk(weights, rankings, &mut next, k, Rational::one(), &mut out);
    out
}

fn cluster_walk(
    weights: &[Rational],
    rankings: &[Vec<usize>],
    next: &mut Vec<usize>,
    left: usize,
    p: Rational,
    out: &mut BTreeMap<usize, Rational>,
) {
    if left == 0 || p.is_zero() {
        return;
    }
    let open: Vec<usize> = (0..rankings.len()).filter(|&c| next[c] < rankings[c].len()).collect();
    let total: Rational = open.iter().map(|&c| weights[c].clone()).sum();
    for &c in &open {
        let pc = if total.is_zero() {
            &p / int(open.len() as i64)
        } else {
            &p * &weights[c] / &total
        };
        if pc.is_zero() {
            continue;
        }
        let a = rankings[c][next[c]];
        *out.get_mut(&a).unwrap() += &pc;
        next[c] += 1;
        cluster_walk(weights, rankings, next, left - 1, pc, out);
        next[c] -= 1;
    }
}

/// Agents outside the top `k` that enter it once their own outgoing scores
/// are zeroed.
pub fn potential_oracle(profile: &ExactProfile, k: usize) -> BTreeSet<AgentId> {
    let top = vanilla_oracle(profile, k);
    (0..profile.n())
        .map(AgentId)
        .filter(|b| !top.contains(b))
        .filter(|&b| {
            let mut silenced = profile.clone();
            silenced.replace_row(b, BTreeMap::new()).unwrap();
            vanilla_oracle(&silenced, k).contains(&b)
        })
        .collect()
}

// ---- fixed instances for the abstention rate ----

/// Everyone reviews everyone; agent 1 props up agent 0, its only rival.
pub fn credible_four() -> (ExactProfile, ReviewAssignment, usize) {
    let rows: [[i64; 4]; 4] = [[0, 5, 0, 0], [9, 0, 0, 0], [0, 3, 0, 1], [2, 2, 2, 0]];
    let profile = ExactProfile::from_entries(
        4,
        (0..4).flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j, int(rows[i][j])))),
    )
    .unwrap();
    let assignment = ReviewAssignment::from_profile(&profile);
    (profile, assignment, 1)
}

/// Six agents in a ring, each reviewing the next two; agents 4 and 5 back
/// agent 0 so heavily that nobody can enter the top one.
pub fn credible_ring() -> (ExactProfile, ReviewAssignment, usize) {
    let n = 6;
    let mut profile = ExactProfile::new(n);
    let mut reviews = vec![BTreeSet::new(); n];
    for i in 0..n {
        for j in [(i + 1) % n, (i + 2) % n] {
            let s = if j == 0 { 10 } else { 1 };
            profile.set(AgentId(i), AgentId(j), int(s)).unwrap();
            reviews[i].insert(AgentId(j));
        }
    }
    (profile, ReviewAssignment::new(2, reviews).unwrap(), 1)
}

/// Random shares over a common denominator, nudged so they sum to an integer.
pub fn random_shares(ell: usize, denom: u64, seed: u64) -> peerselect::ExactShares {
    let mut rng = seeded(seed);
    let d = denom as i64;
    let mut nums: Vec<i64> = (0..ell).map(|_| rng.gen_range(0..5 * d)).collect();
    let total: i64 = nums.iter().sum();
    let k = (total + d - 1) / d;
    let pick = rng.gen_range(0..ell);
    nums[pick] += k * d - total;
    peerselect::ShareVector::new(nums.into_iter().map(|x| ratio(x, d)).collect()).unwrap()
}

// ---- random instances for the axiom suites ----

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub profile: ExactProfile,
    pub clustering: Clustering,
    pub assignment: ReviewAssignment,
    pub k: usize,
}

/// A random instance with at most `max_n` agents. Reviewers score a random
/// subset of foreign agents; some submit nothing or only zeros. `k` never
/// exceeds the smallest cluster, so no quota can overflow.
pub fn random_instance<R: Rng>(rng: &mut R, max_n: usize) -> RandomInstance {
    let n = rng.gen_range(4..=max_n);
    let ell = rng.gen_range(2..=(n / 2).clamp(2, 6));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut cluster_of = vec![0; n];
    for (pos, &a) in order.iter().enumerate() {
        cluster_of[a] = pos % ell;
    }
    let clustering = Clustering::new(ell, cluster_of).unwrap();
    let foreign = |i: usize| -> Vec<usize> {
        (0..n).filter(|&j| clustering.cluster_of(AgentId(j)) != clustering.cluster_of(AgentId(i))).collect()
    };
    let m = rng.gen_range(1..=(n - clustering.max_size()).min(6));
    let mut reviews = Vec::with_capacity(n);
    let mut profile = ExactProfile::new(n);
    for i in 0..n {
        let picks: BTreeSet<AgentId> = foreign(i).choose_multiple(rng, m).map(|&j| AgentId(j)).collect();
        let mode = rng.gen_range(0..10);
        for &j in &picks {
            let score = match mode {
                0 => continue,
                1 => int(0),
                _ => random_score(rng),
            };
            profile.set(AgentId(i), j, score).unwrap();
        }
        reviews.push(picks);
    }
    let assignment = ReviewAssignment::new(m, reviews).unwrap();
    let k = rng.gen_range(1..=clustering.min_size());
    RandomInstance { profile, clustering, assignment, k }
}

pub fn random_score<R: Rng>(rng: &mut R) -> Rational {
    match rng.gen_range(0..4) {
        0 => int(0),
        1 => int(rng.gen_range(1..=100)),
        _ => ratio(rng.gen_range(0..=1000), rng.gen_range(1..=97)),
    }
}

/// A fresh report for `reviewer` over its assigned reviewees.
pub fn random_row<R: Rng>(rng: &mut R, assignment: &ReviewAssignment, reviewer: usize) -> BTreeMap<AgentId, Rational> {
    let mode = rng.gen_range(0..8);
    assignment
        .reviewees(AgentId(reviewer))
        .iter()
        .filter_map(|&j| match mode {
            0 => None,
            1 => Some((j, int(0))),
            _ => Some((j, random_score(rng))),
        })
        .collect()
}

pub fn seeded(seed: u64) -> peerselect::seed::SeedRng {
    Seed(seed).rng()
}

/// Standard error of a Bernoulli frequency.
pub fn bernoulli_se(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}
