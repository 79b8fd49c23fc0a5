//! Randomized apportionment: a lottery over at most `ell` nice allocations
//! whose expected quota for every cluster equals its fractional share.
//!
//! Clusters are processed in order of increasing fractional part (ties by
//! original index). A window of `alpha` consecutive clusters starting at
//! `low` is rounded up together with every cluster above `high`; each step
//! gives the current allocation as much probability as possible without
//! over-rounding cluster `low` up or cluster `high` down, then advances
//! whichever cursor was exhausted.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{AllocationDistribution, NiceAllocation, ShareVector};
use crate::scalar::Scalar;
use crate::seed::Seed;

/// Largest number of fractional shares `enumerate_nice_allocations` accepts.
pub const ENUMERATION_LIMIT: usize = 25;

/// Loop state after a step, indexed in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct ApportionState<S> {
    /// Clusters still to be rounded up inside the sliding window.
    pub alpha: usize,
    /// First sorted position of the window (0-based).
    pub low: usize,
    /// One past the last position that is still rounded down by default.
    pub high_end: usize,
    /// Probability with which each sorted cluster has been rounded up so far.
    pub p: Vec<S>,
    /// Probability handed out so far.
    pub pbar: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// `alpha` reached zero; the remaining probability goes to this allocation.
    Remainder,
    /// Cluster `low` received all of its rounding-up probability.
    LowAdvanced,
    /// Cluster `high` received all of its rounding-down probability.
    HighRetired,
}

/// One loop iteration, kept for the verbose trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep<S> {
    /// Allocation in the caller's cluster order.
    pub allocation: NiceAllocation,
    pub probability: S,
    pub kind: StepKind,
    /// State after the step.
    pub state: ApportionState<S>,
}

impl<S: Scalar> fmt::Display for TraceStep<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            StepKind::Remainder => "remainder",
            StepKind::LowAdvanced => "low advances",
            StepKind::HighRetired => "high retires",
        };
        write!(
            f,
            "({}) prob {} [{}] -> alpha={} low={} high={} pbar={}",
            self.allocation,
            self.probability.to_exact_string(),
            what,
            self.state.alpha,
            self.state.low + 1,
            self.state.high_end,
            self.state.pbar.to_exact_string(),
        )
    }
}

/// Sorted processing order: ascending fractional part, then original index.
fn processing_order<S: Scalar>(fracs: &[S]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fracs.len()).collect();
    order.sort_by(|&a, &b| {
        fracs[a]
            .partial_cmp(&fracs[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Builds the allocation lottery for `shares`.
///
/// Zero-probability allocations are omitted and the support is reported in
/// the order the loop produced it.
pub fn allocation_from_shares<S: Scalar>(shares: &ShareVector<S>) -> Result<AllocationDistribution<S>> {
    allocation_from_shares_traced(shares).map(|(dist, _)| dist)
}

/// Same as [`allocation_from_shares`], also returning every loop step,
/// including steps that received probability zero.
pub fn allocation_from_shares_traced<S: Scalar>(
    shares: &ShareVector<S>,
) -> Result<(AllocationDistribution<S>, Vec<TraceStep<S>>)> {
    let ell = shares.len();
    let values = shares.shares();
    let floors = shares.floors();
    let ceils = shares.ceils();
    let fracs: Vec<S> = values.iter().map(Scalar::fract).collect();
    let round_down_need: Vec<S> = values
        .iter()
        .zip(&ceils)
        .map(|(s, c)| S::from_usize(*c) - s.clone())
        .collect();

    let frac_total = fracs.iter().fold(S::zero(), |acc, f| acc + f.clone());
    let alpha0 = frac_total
        .to_integer()
        .filter(|a| *a >= 0 && (*a as usize) <= ell)
        .ok_or_else(|| {
            Error::InvalidShares(format!("fractional parts sum to {frac_total}, not an integer"))
        })? as usize;

    let order = processing_order(&fracs);
    let mut state = ApportionState {
        alpha: alpha0,
        low: 0,
        high_end: ell,
        p: vec![S::zero(); ell],
        pbar: S::zero(),
    };
    let mut support: Vec<(NiceAllocation, S)> = Vec::new();
    let mut trace = Vec::new();

    while state.low < state.high_end {
        let low = state.low;
        let high = state.high_end - 1;
        let rounded_up =
            |pos: usize| (pos >= low && pos < low + state.alpha) || pos >= state.high_end;

        let mut quotas = floors.clone();
        for pos in (0..ell).filter(|&pos| rounded_up(pos)) {
            quotas[order[pos]] = ceils[order[pos]];
        }
        let up_positions: Vec<usize> = (0..ell).filter(|&pos| rounded_up(pos)).collect();

        let (prob, kind) = if state.alpha == 0 {
            (S::one() - state.pbar.clone(), StepKind::Remainder)
        } else {
            let lo_c = order[low];
            let hi_c = order[high];
            let up_left = fracs[lo_c].clone() - state.p[low].clone();
            let down_left =
                round_down_need[hi_c].clone() - state.pbar.clone() + state.p[high].clone();
            if up_left < down_left && !up_left.approx_eq(&down_left) {
                (up_left, StepKind::LowAdvanced)
            } else {
                (down_left, StepKind::HighRetired)
            }
        };
        if prob.is_negative() {
            return Err(Error::Internal(format!(
                "negative step probability {prob} at low={low} high={high}"
            )));
        }

        for pos in up_positions {
            state.p[pos] = state.p[pos].clone() + prob.clone();
        }
        state.pbar = state.pbar.clone() + prob.clone();
        match kind {
            StepKind::Remainder => state.high_end -= 1,
            StepKind::LowAdvanced => state.low += 1,
            StepKind::HighRetired => {
                state.high_end -= 1;
                state.alpha -= 1;
            }
        }

        let allocation = NiceAllocation::new(quotas);
        if !prob.is_negligible() {
            if !allocation.is_nice_for(shares) {
                return Err(Error::Internal(format!(
                    "allocation ({allocation}) with probability {prob} breaks the quota rule"
                )));
            }
            match support.iter_mut().find(|(a, _)| *a == allocation) {
                Some((_, p)) => *p = p.clone() + prob.clone(),
                None => support.push((allocation.clone(), prob.clone())),
            }
        }
        trace.push(TraceStep {
            allocation,
            probability: prob,
            kind,
            state: state.clone(),
        });
    }

    if !state.pbar.approx_eq(&S::one()) {
        return Err(Error::Internal(format!(
            "allocated probability {} instead of 1",
            state.pbar
        )));
    }
    Ok((AllocationDistribution { support }, trace))
}

/// Inverse-CDF draw over the support in its stored order.
pub fn sample_allocation<S: Scalar>(dist: &AllocationDistribution<S>, seed: Seed) -> NiceAllocation {
    sample_allocation_with(dist, &mut seed.rng())
}

pub fn sample_allocation_with<S: Scalar, R: Rng + ?Sized>(
    dist: &AllocationDistribution<S>,
    rng: &mut R,
) -> NiceAllocation {
    let weights: Vec<S> = dist.support.iter().map(|(_, p)| p.clone()).collect();
    let idx = S::sample_index(&weights, rng).unwrap_or(0);
    dist.support[idx].0.clone()
}

/// Expected quota of every cluster under `dist`.
pub fn expected_allocation<S: Scalar>(dist: &AllocationDistribution<S>) -> Vec<S> {
    let ell = dist.support.first().map_or(0, |(a, _)| a.quotas.len());
    let mut expected = vec![S::zero(); ell];
    for (allocation, prob) in &dist.support {
        for (e, t) in expected.iter_mut().zip(&allocation.quotas) {
            *e = e.clone() + prob.clone() * S::from_usize(*t);
        }
    }
    expected
}

/// Every allocation that rounds each share down or up and sums to `k`.
/// Exponential in the number of fractional shares, so it is capped.
pub fn enumerate_nice_allocations<S: Scalar>(shares: &ShareVector<S>) -> Result<Vec<NiceAllocation>> {
    let floors = shares.floors();
    let ceils = shares.ceils();
    let fractional: Vec<usize> = (0..shares.len()).filter(|&i| floors[i] != ceils[i]).collect();
    if fractional.len() > ENUMERATION_LIMIT {
        return Err(Error::TooManyFractional {
            count: fractional.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let base: usize = floors.iter().sum();
    let ups = shares.k().checked_sub(base).ok_or_else(|| {
        Error::InvalidShares(format!("floors sum to {base}, more than k = {}", shares.k()))
    })?;
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << fractional.len()) {
        if mask.count_ones() as usize != ups {
            continue;
        }
        let mut quotas = floors.clone();
        for (bit, &i) in fractional.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                quotas[i] = ceils[i];
            }
        }
        out.push(NiceAllocation::new(quotas));
    }
    out.sort();
    Ok(out)
}
