//! Closed-form Mallows masses and frequency checks.

use std::collections::HashMap;

use peerselect::generation::{mallows_sample_with, GroundTruth, MallowsParams};
use peerselect::{AgentId, Seed};

/// Every ordering of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Pairs ordered differently by `a` and `b`.
pub fn kendall_tau(a: &[usize], b: &[usize]) -> usize {
    let mut pos = vec![0; a.len()];
    for (i, &x) in b.iter().enumerate() {
        pos[x] = i;
    }
    let mut d = 0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if pos[a[i]] > pos[a[j]] {
                d += 1;
            }
        }
    }
    d
}

/// `phi^d / Z` for every ordering, normalized by summing over all of them.
pub fn mallows_mass(sigma: &[usize], phi: f64) -> Vec<(Vec<usize>, f64)> {
    let perms = permutations(sigma.len());
    let weights: Vec<f64> = perms.iter().map(|p| phi.powi(kendall_tau(p, sigma) as i32)).collect();
    let z: f64 = weights.iter().sum();
    perms.into_iter().zip(weights).map(|(p, w)| (p, w / z)).collect()
}

/// Largest deviation, in standard errors, between sampled and closed-form
/// frequencies over `draws` samples.
pub fn worst_z(sigma: &[usize], phi: f64, draws: usize, seed: u64) -> f64 {
    let truth = GroundTruth::new(sigma.iter().copied().map(AgentId).collect()).unwrap();
    let params = MallowsParams::new(phi).unwrap();
    let mut rng = Seed(seed).rng();
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for _ in 0..draws {
        let s: Vec<usize> = mallows_sample_with(&truth, params, &mut rng).into_iter().map(|a| a.0).collect();
        *counts.entry(s).or_default() += 1;
    }
    mallows_mass(sigma, phi)
        .into_iter()
        .map(|(p, mass)| {
            let f = counts.get(&p).copied().unwrap_or(0) as f64 / draws as f64;
            let se = super::bernoulli_se(mass, draws);
            if se == 0.0 {
                if f == mass { 0.0 } else { f64::INFINITY }
            } else {
                (f - mass).abs() / se
            }
        })
        .fold(0.0, f64::max)
}
