//! Seeded parameter sweeps comparing every mechanism on generated instances.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generation::{generate_instance, Instance};
use crate::mechanisms::{run_mechanism, MechanismId};
use crate::metrics::{ground_truth_topk, overlap, summarize, SummaryStats};
use crate::seed::Seed;
use crate::Rational;

/// One point of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub ell: usize,
    pub phi: f64,
}

impl CellParams {
    fn seed_labels(&self) -> [u64; 5] {
        [
            self.n as u64,
            self.k as u64,
            self.m as u64,
            self.ell as u64,
            self.phi.to_bits(),
        ]
    }

    pub fn trial_seed(&self, master: Seed, trial: usize) -> Seed {
        let mut labels = self.seed_labels().to_vec();
        labels.push(trial as u64);
        master.derive(&labels)
    }
}

impl fmt::Display for CellParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} k={} m={} ell={} phi={}",
            self.n, self.k, self.m, self.ell, self.phi
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub n: usize,
    pub trials: usize,
    pub ks: Vec<usize>,
    pub ms: Vec<usize>,
    pub ells: Vec<usize>,
    pub phis: Vec<f64>,
    pub seed: Seed,
}

impl SweepGrid {
    /// 130 agents, k 15..35, m 5..15, ell 3..6, phi 0..0.5.
    pub fn default_grid(trials: usize, seed: Seed) -> Self {
        SweepGrid {
            n: 130,
            trials,
            ks: vec![15, 20, 25, 30, 35],
            ms: vec![5, 7, 9, 11, 13, 15],
            ells: vec![3, 4, 5, 6],
            phis: vec![0.0, 0.1, 0.2, 0.35, 0.5],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0
            || self.ks.is_empty()
            || self.ms.is_empty()
            || self.ells.is_empty()
            || self.phis.is_empty()
        {
            return Err(Error::InvalidParameter(
                "sweep grid needs at least one trial and one value per parameter".into(),
            ));
        }
        Ok(())
    }

    /// Cells in k, m, ell, phi nesting order.
    pub fn cells(&self) -> Vec<CellParams> {
        let mut cells = Vec::new();
        for &k in &self.ks {
            for &m in &self.ms {
                for &ell in &self.ells {
                    for &phi in &self.phis {
                        cells.push(CellParams {
                            n: self.n,
                            k,
                            m,
                            ell,
                            phi,
                        });
                    }
                }
            }
        }
        cells
    }
}

/// Per-mechanism outcome in one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismResult {
    pub mechanism: MechanismId,
    pub overlap_v: f64,
    pub overlap_gt: f64,
    pub abstained: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub cell: CellParams,
    pub trial: usize,
    /// In [`MechanismId::ALL`] order.
    pub results: Vec<MechanismResult>,
}

impl ExperimentRecord {
    pub fn result(&self, mechanism: MechanismId) -> Option<&MechanismResult> {
        self.results.iter().find(|r| r.mechanism == mechanism)
    }
}

/// Generates one instance and scores every mechanism on it.
pub fn run_trial(cell: CellParams, trial: usize, trial_seed: Seed) -> Result<ExperimentRecord> {
    let instance: Instance<Rational> =
        generate_instance(cell.n, cell.m, cell.ell, cell.phi, trial_seed.derive(&[0]))?;
    let gt = ground_truth_topk(&instance.ground_truth, cell.k);
    let mut outcomes = Vec::with_capacity(MechanismId::ALL.len());
    for mech in MechanismId::ALL {
        let outcome = run_mechanism(
            mech,
            &instance.profile,
            Some(&instance.clustering),
            &instance.assignment,
            cell.k,
            trial_seed.derive(&[mech.code()]),
        )
        .map_err(|e| Error::InvalidParameter(format!("{mech}: {e}")))?;
        outcomes.push((mech, outcome.winners));
    }
    let reference = outcomes
        .iter()
        .find(|(m, _)| *m == MechanismId::Vanilla)
        .map(|(_, w)| w.clone())
        .unwrap_or_default();
    let results = outcomes
        .into_iter()
        .map(|(mechanism, winners)| MechanismResult {
            mechanism,
            overlap_v: overlap(&winners, &reference, cell.k).to_f64(),
            overlap_gt: overlap(&winners, &gt, cell.k).to_f64(),
            abstained: mechanism == MechanismId::CredibleSubset && winners.is_empty() && cell.k > 0,
        })
        .collect();
    Ok(ExperimentRecord {
        cell,
        trial,
        results,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    VsVanilla,
    VsGroundTruth,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::VsVanilla => "v",
            Metric::VsGroundTruth => "gt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: CellParams,
    pub mechanism: MechanismId,
    pub metric: Metric,
    pub stats: SummaryStats,
}

/// A cell, or a single trial of a cell, that could not be run.
#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub cell: CellParams,
    /// `None` when every trial of the cell failed.
    pub trial: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<ExperimentRecord>,
    pub summaries: Vec<CellSummary>,
    pub skipped: Vec<Skipped>,
}

/// Runs the grid in parallel. The result does not depend on scheduling.
pub fn run_sweep(grid: &SweepGrid) -> Result<SweepResult> {
    run_sweep_with(grid, true)
}

pub fn run_sweep_with(grid: &SweepGrid, parallel: bool) -> Result<SweepResult> {
    grid.validate()?;
    let cells = grid.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..grid.trials).map(move |t| (c, t)))
        .collect();
    let run = |&(c, t): &(usize, usize)| {
        let cell = cells[c];
        run_trial(cell, t, cell.trial_seed(grid.seed, t))
    };
    let outcomes: Vec<Result<ExperimentRecord>> = if parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };

    let mut records = Vec::new();
    let mut summaries = Vec::new();
    let mut skipped = Vec::new();
    let mut outcomes = outcomes.into_iter();
    for cell in cells {
        let mut cell_records = Vec::new();
        let mut failures = Vec::new();
        for t in 0..grid.trials {
            match outcomes.next().expect("one outcome per job") {
                Ok(r) => cell_records.push(r),
                Err(e) => failures.push((t, e.to_string())),
            }
        }
        if cell_records.is_empty() {
            skipped.push(Skipped {
                cell,
                trial: None,
                reason: failures.swap_remove(0).1,
            });
            continue;
        }
        skipped.extend(failures.into_iter().map(|(t, reason)| Skipped {
            cell,
            trial: Some(t),
            reason,
        }));
        summaries.extend(summarize_cell(cell, &cell_records)?);
        records.extend(cell_records);
    }
    Ok(SweepResult {
        records,
        summaries,
        skipped,
    })
}

fn summarize_cell(cell: CellParams, records: &[ExperimentRecord]) -> Result<Vec<CellSummary>> {
    let mut out = Vec::new();
    for mechanism in MechanismId::ALL {
        for metric in [Metric::VsVanilla, Metric::VsGroundTruth] {
            let samples: Vec<f64> = records
                .iter()
                .filter_map(|r| r.result(mechanism))
                .map(|r| match metric {
                    Metric::VsVanilla => r.overlap_v,
                    Metric::VsGroundTruth => r.overlap_gt,
                })
                .collect();
            out.push(CellSummary {
                cell,
                mechanism,
                metric,
                stats: summarize(&samples)?,
            });
        }
    }
    Ok(out)
}

/// Six fractional digits, ties to even.
pub fn format_decimal(x: f64) -> String {
    format!("{x:.6}")
}

pub const RECORDS_HEADER: &str = "n,k,m,ell,phi,trial,mechanism,overlap_v,overlap_gt,abstained";
pub const SUMMARY_HEADER: &str = "n,k,m,ell,phi,mechanism,metric,mean,std,min,max,count";

fn cell_prefix(c: &CellParams) -> String {
    format!("{},{},{},{},{}", c.n, c.k, c.m, c.ell, format_decimal(c.phi))
}

pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], mut out: W) -> Result<()> {
    writeln!(out, "{RECORDS_HEADER}")?;
    for r in records {
        let prefix = cell_prefix(&r.cell);
        for m in &r.results {
            writeln!(
                out,
                "{prefix},{},{},{},{},{}",
                r.trial,
                m.mechanism,
                format_decimal(m.overlap_v),
                format_decimal(m.overlap_gt),
                m.abstained
            )?;
        }
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(summaries: &[CellSummary], mut out: W) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for s in summaries {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cell_prefix(&s.cell),
            s.mechanism,
            s.metric.as_str(),
            format_decimal(s.stats.mean),
            format_decimal(s.stats.std),
            format_decimal(s.stats.min),
            format_decimal(s.stats.max),
            s.stats.count
        )?;
    }
    Ok(())
}
