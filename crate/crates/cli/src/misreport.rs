//! Does a focal bidder gain by scaling its reported budget and values?

use std::collections::BTreeMap;

use pacing_core::mip::{solve_instance, Objective, SolveStatus, SolverConfig};
use pacing_core::{PacingInstance, PacingOutcome};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exit::{CliError, CliResult};
use crate::gap::NamedInstance;
use crate::store::instance_hash;

/// A cell beats the truthful one when its utility is larger by more than this.
pub const GAIN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisreportGrid {
    /// Budget scalars `β`.
    pub betas: Vec<f64>,
    /// Value scalars `ν`.
    pub nus: Vec<f64>,
}

impl MisreportGrid {
    /// `β ∈ {0.6, 0.8, …, 1.4}`, `ν ∈ {0.5, 0.6, …, 1.4}`.
    pub fn standard() -> Self {
        Self {
            betas: (0..5).map(|k| (6 + 2 * k) as f64 / 10.0).collect(),
            nus: Self::nus(),
        }
    }

    /// As [`MisreportGrid::standard`] with `β` in steps of 0.05.
    pub fn fine() -> Self {
        Self {
            betas: (0..17).map(|k| (60 + 5 * k) as f64 / 100.0).collect(),
            nus: Self::nus(),
        }
    }

    fn nus() -> Vec<f64> {
        (0..10).map(|k| (5 + k) as f64 / 10.0).collect()
    }

    /// Grid cells in row-major order, with the truthful cell first.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(1.0, 1.0)];
        for &b in &self.betas {
            for &v in &self.nus {
                if (b, v) != (1.0, 1.0) {
                    out.push((b, v));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisreportConfig {
    pub grid: MisreportGrid,
    /// Index of the misreporting bidder in every instance.
    pub focal: usize,
    pub solver: SolverConfig,
}

impl Default for MisreportConfig {
    fn default() -> Self {
        Self {
            grid: MisreportGrid::standard(),
            focal: 0,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisreportCell {
    pub instance: String,
    pub instance_hash: String,
    pub n: usize,
    pub focal: usize,
    pub beta: f64,
    pub nu: f64,
    pub status: SolveStatus,
    /// Focal utility at true values; empty for unsolved cells.
    pub utility: Option<f64>,
    pub gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceVerdict {
    pub instance: String,
    pub instance_hash: String,
    pub n: usize,
    pub truthful_utility: Option<f64>,
    pub best_utility: Option<f64>,
    pub best_beta: Option<f64>,
    pub best_nu: Option<f64>,
    pub incentive: bool,
    pub unsolved_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisreportSummary {
    pub n: usize,
    /// Instances with a solved truthful cell.
    pub instances: usize,
    pub incentive_pct: f64,
    pub max_gain: f64,
    pub mean_max_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisreportReport {
    pub summary: Vec<MisreportSummary>,
    pub instances: Vec<InstanceVerdict>,
    pub cells: Vec<MisreportCell>,
}

/// `Σ_j x_ij (v_ij − p_j)` at the true values.
pub fn true_utility(truth: &PacingInstance, out: &PacingOutcome, i: usize) -> f64 {
    (0..truth.m())
        .map(|j| out.fractions[i][j] * (truth.value(i, j) - out.prices[j]))
        .sum()
}

/// The instance as reported by bidder `i`: budget times `beta`, values times `nu`.
pub fn reported(truth: &PacingInstance, i: usize, beta: f64, nu: f64) -> CliResult<PacingInstance> {
    let row = truth.values()[i].iter().map(|v| v * nu).collect();
    let inst = truth.with_values_row(i, row)?;
    Ok(if truth.is_unlimited(i) {
        inst
    } else {
        inst.with_budget(i, truth.budget(i) * beta)?
    })
}

fn solve_cell(
    item: &NamedInstance,
    hash: &str,
    cfg: &MisreportConfig,
    beta: f64,
    nu: f64,
) -> CliResult<MisreportCell> {
    let inst = reported(&item.instance, cfg.focal, beta, nu)?;
    let res = solve_instance(&inst, Objective::MaxPacedWelfare, &cfg.solver)?;
    let utility = match (&res.outcome, res.verified) {
        (Some(out), true) => Some(true_utility(&item.instance, out, cfg.focal)),
        _ => None,
    };
    Ok(MisreportCell {
        instance: item.id.clone(),
        instance_hash: hash.into(),
        n: item.instance.n(),
        focal: cfg.focal,
        beta,
        nu,
        status: res.status,
        utility,
        gain: None,
    })
}

fn verdict(cells: &mut [MisreportCell]) -> InstanceVerdict {
    let truthful = cells[0].utility;
    for c in cells.iter_mut() {
        c.gain = truthful.zip(c.utility).map(|(t, u)| u - t);
    }
    let best = cells
        .iter()
        .filter(|c| c.utility.is_some())
        .max_by(|a, b| a.utility.partial_cmp(&b.utility).expect("finite utilities"));
    let first = &cells[0];
    InstanceVerdict {
        instance: first.instance.clone(),
        instance_hash: first.instance_hash.clone(),
        n: first.n,
        truthful_utility: truthful,
        best_utility: best.and_then(|c| c.utility),
        best_beta: best.map(|c| c.beta),
        best_nu: best.map(|c| c.nu),
        incentive: cells.iter().any(|c| c.gain.is_some_and(|g| g > GAIN_TOL)),
        unsolved_cells: cells.iter().filter(|c| c.utility.is_none()).count(),
    }
}

fn summarize(verdicts: &[InstanceVerdict]) -> Vec<MisreportSummary> {
    let mut by_n: BTreeMap<usize, Vec<&InstanceVerdict>> = BTreeMap::new();
    for v in verdicts.iter().filter(|v| v.truthful_utility.is_some()) {
        by_n.entry(v.n).or_default().push(v);
    }
    by_n.into_iter()
        .map(|(n, vs)| {
            let gains: Vec<f64> = vs
                .iter()
                .map(|v| {
                    (v.best_utility.unwrap_or(0.0) - v.truthful_utility.unwrap_or(0.0)).max(0.0)
                })
                .collect();
            MisreportSummary {
                n,
                instances: vs.len(),
                incentive_pct: 100.0 * vs.iter().filter(|v| v.incentive).count() as f64
                    / vs.len() as f64,
                max_gain: gains.iter().copied().fold(0.0, f64::max),
                mean_max_gain: gains.iter().sum::<f64>() / gains.len() as f64,
            }
        })
        .collect()
}

/// Solves every grid cell of every instance for maximum paced welfare.
/// Unsolved cells stay in the table with no utility and are left out of
/// all comparisons.
pub fn run_misreport_study(
    instances: &[NamedInstance],
    cfg: &MisreportConfig,
) -> CliResult<MisreportReport> {
    if let Some(bad) = instances.iter().find(|it| cfg.focal >= it.instance.n()) {
        return Err(CliError::parse(format!(
            "focal bidder {} out of range for `{}`",
            cfg.focal, bad.id
        )));
    }
    let grid = cfg.grid.cells();
    let jobs: Vec<(usize, f64, f64)> = (0..instances.len())
        .flat_map(|k| grid.iter().map(move |&(b, v)| (k, b, v)))
        .collect();
    let hashes: Vec<String> = instances
        .iter()
        .map(|it| instance_hash(&it.instance))
        .collect();
    let solved: Vec<CliResult<MisreportCell>> = jobs
        .par_iter()
        .map(|&(k, b, v)| solve_cell(&instances[k], &hashes[k], cfg, b, v))
        .collect();
    let mut cells = solved.into_iter().collect::<CliResult<Vec<_>>>()?;
    let verdicts: Vec<InstanceVerdict> = cells.chunks_mut(grid.len()).map(verdict).collect();
    Ok(MisreportReport {
        summary: summarize(&verdicts),
        instances: verdicts,
        cells,
    })
}
