//! Plain CSV formats for profiles, clusterings, assignments and reference
//! orders. Scores are decimals or `p/q`, converted exactly.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::generation::GroundTruth;
use crate::model::{AgentId, Clustering, ReviewAssignment, ReviewProfile};
use crate::scalar::Scalar;

pub const PROFILE_HEADER: &str = "reviewer,reviewee,score";
pub const CLUSTERING_HEADER: &str = "agent,cluster";
pub const ASSIGNMENT_HEADER: &str = "reviewer,reviewee";

/// Data lines with 1-based line numbers, skipping blanks, `#` comments and
/// the expected header.
fn data_lines<'a>(text: &'a str, header: &'a str) -> impl Iterator<Item = (usize, Vec<&'a str>)> + 'a {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .filter(move |(idx, (_, l))| !(*idx == 0 && l.replace(' ', "") == header))
        .map(|(_, (no, l))| (no, l.split(',').map(str::trim).collect()))
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field_count(line: usize, fields: &[&str], want: usize) -> Result<()> {
    if fields.len() != want {
        return Err(parse_err(
            line,
            format!("expected {want} fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

fn parse_id(line: usize, field: &str) -> Result<usize> {
    field
        .parse()
        .map_err(|_| parse_err(line, format!("invalid agent id {field:?}")))
}

/// Reads a profile. Without `n`, the agent count is one past the largest id.
pub fn read_profile<S: Scalar>(text: &str, n: Option<usize>) -> Result<ReviewProfile<S>> {
    let mut entries = Vec::new();
    for (line, f) in data_lines(text, PROFILE_HEADER) {
        field_count(line, &f, 3)?;
        let i = parse_id(line, f[0])?;
        let j = parse_id(line, f[1])?;
        let score = S::parse_decimal(f[2]).map_err(|e| parse_err(line, e.to_string()))?;
        entries.push((line, i, j, score));
    }
    let n = n.unwrap_or_else(|| entries.iter().map(|(_, i, j, _)| i.max(j) + 1).max().unwrap_or(0));
    let mut profile = ReviewProfile::new(n);
    let mut seen = BTreeSet::new();
    for (line, i, j, score) in entries {
        if !seen.insert((i, j)) {
            return Err(parse_err(line, format!("duplicate review {i} -> {j}")));
        }
        profile
            .set(AgentId(i), AgentId(j), score)
            .map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(profile)
}

pub fn read_clustering(text: &str) -> Result<Clustering> {
    let mut pairs = Vec::new();
    for (line, f) in data_lines(text, CLUSTERING_HEADER) {
        field_count(line, &f, 2)?;
        pairs.push((line, parse_id(line, f[0])?, parse_id(line, f[1])?));
    }
    let n = pairs.len();
    let mut cluster_of = vec![None; n];
    for &(line, a, c) in &pairs {
        if a >= n {
            return Err(parse_err(line, format!("agent {a} outside 0..{n}")));
        }
        if cluster_of[a].replace(c).is_some() {
            return Err(parse_err(line, format!("agent {a} listed twice")));
        }
    }
    let cluster_of: Vec<usize> = cluster_of.into_iter().map(|c| c.unwrap_or(0)).collect();
    let ell = cluster_of.iter().max().map_or(0, |c| c + 1);
    Clustering::new(ell, cluster_of)
}

/// Reads an assignment; `m` is the largest out-degree.
pub fn read_assignment(text: &str, n: Option<usize>) -> Result<ReviewAssignment> {
    let mut pairs = Vec::new();
    for (line, f) in data_lines(text, ASSIGNMENT_HEADER) {
        field_count(line, &f, 2)?;
        pairs.push((line, parse_id(line, f[0])?, parse_id(line, f[1])?));
    }
    let n = n.unwrap_or_else(|| pairs.iter().map(|(_, i, j)| i.max(j) + 1).max().unwrap_or(0));
    let mut reviews = vec![BTreeSet::new(); n];
    for (line, i, j) in pairs {
        if i >= n || j >= n {
            return Err(parse_err(line, format!("review {i} -> {j} outside 0..{n}")));
        }
        if !reviews[i].insert(AgentId(j)) {
            return Err(parse_err(line, format!("duplicate assignment {i} -> {j}")));
        }
    }
    let m = reviews.iter().map(BTreeSet::len).max().unwrap_or(0);
    ReviewAssignment::new(m, reviews)
}

pub fn read_ground_truth(text: &str) -> Result<GroundTruth> {
    let line = text
        .lines()
        .enumerate()
        .find(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let Some((idx, line)) = line else {
        return GroundTruth::new(Vec::new());
    };
    let ids = line
        .split(',')
        .map(|f| parse_id(idx + 1, f.trim()).map(AgentId))
        .collect::<Result<Vec<_>>>()?;
    GroundTruth::new(ids)
}

/// Integers print bare, other exact values as `p/q`.
pub fn format_score<S: Scalar>(value: &S) -> String {
    match (S::EXACT, value.to_integer()) {
        (true, Some(i)) => i.to_string(),
        (true, None) => value.to_exact_string(),
        (false, _) => value.to_string(),
    }
}

pub fn write_profile<S: Scalar>(profile: &ReviewProfile<S>) -> String {
    let mut out = format!("{PROFILE_HEADER}\n");
    for (i, j, s) in profile.entries() {
        let _ = writeln!(out, "{i},{j},{}", format_score(s));
    }
    out
}

pub fn write_clustering(clustering: &Clustering) -> String {
    let mut out = format!("{CLUSTERING_HEADER}\n");
    for a in 0..clustering.n() {
        let _ = writeln!(out, "{a},{}", clustering.cluster_of(AgentId(a)));
    }
    out
}

pub fn write_assignment(assignment: &ReviewAssignment) -> String {
    let mut out = format!("{ASSIGNMENT_HEADER}\n");
    for i in (0..assignment.n()).map(AgentId) {
        for j in assignment.reviewees(i) {
            let _ = writeln!(out, "{i},{j}");
        }
    }
    out
}

pub fn write_ground_truth(gt: &GroundTruth) -> String {
    let ids: Vec<String> = gt.sigma().iter().map(ToString::to_string).collect();
    format!("{}\n", ids.join(","))
}
