//! Spread between the best and worst equilibria of each instance.

use pacing_core::mip::{solve_instance, Objective, SolveStatus, SolverConfig};
use pacing_core::{objectives, ObjectiveValues, PacingInstance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exit::CliResult;
use crate::store::instance_hash;

/// Gaps at most this fraction of the larger value count as no gap.
pub const NO_GAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedInstance {
    pub id: String,
    pub instance: PacingInstance,
}

/// One solve of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRow {
    pub instance: String,
    pub instance_hash: String,
    pub objective: String,
    pub status: SolveStatus,
    pub verified: bool,
    pub revenue: Option<f64>,
    pub social_welfare: Option<f64>,
    pub paced_welfare: Option<f64>,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapDetail {
    pub instance: String,
    pub instance_hash: String,
    pub measure: String,
    /// Both extremes were solved to optimality.
    pub paired: bool,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub gap: Option<f64>,
    pub gap_pct: Option<f64>,
    pub no_gap: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub measure: String,
    pub instances: usize,
    pub pairs_pct: f64,
    /// Share of paired instances without a gap; empty when nothing paired.
    pub no_gap_pct: Option<f64>,
    pub max_gap_pct: Option<f64>,
    pub mean_gap_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub summary: Vec<GapSummary>,
    pub detail: Vec<GapDetail>,
    pub solves: Vec<SolveRow>,
}

pub const MEASURES: [&str; 3] = ["revenue", "paced_welfare", "social_welfare"];

/// `100 (max − min) / max`, zero when `max` is zero.
pub fn gap_pct(min: f64, max: f64) -> f64 {
    if max > 0.0 {
        100.0 * (max - min) / max
    } else {
        0.0
    }
}

fn solve_all(
    item: &NamedInstance,
    solver: &SolverConfig,
) -> CliResult<Vec<(Objective, SolveRow, Option<ObjectiveValues>)>> {
    let hash = instance_hash(&item.instance);
    Objective::ALL
        .iter()
        .map(|&obj| {
            let res = solve_instance(&item.instance, obj, solver)?;
            let vals = match (&res.outcome, res.verified) {
                (Some(out), true) => Some(objectives(&item.instance, out)?),
                _ => None,
            };
            let row = SolveRow {
                instance: item.id.clone(),
                instance_hash: hash.clone(),
                objective: obj.name().into(),
                status: res.status,
                verified: res.verified,
                revenue: vals.map(|v| v.revenue),
                social_welfare: vals.map(|v| v.social_welfare),
                paced_welfare: vals.map(|v| v.paced_welfare),
                nodes: res.stats.nodes,
            };
            Ok((obj, row, vals))
        })
        .collect()
}

fn detail(id: &str, hash: &str, measure: &str, paired: bool, values: &[f64]) -> GapDetail {
    let min = values.iter().copied().reduce(f64::min);
    let max = values.iter().copied().reduce(f64::max);
    let gap = min.zip(max).map(|(lo, hi)| hi - lo);
    GapDetail {
        instance: id.into(),
        instance_hash: hash.into(),
        measure: measure.into(),
        paired,
        min,
        max,
        gap,
        gap_pct: min.zip(max).map(|(lo, hi)| gap_pct(lo, hi)),
        no_gap: gap
            .zip(max)
            .map(|(g, hi)| g <= NO_GAP_TOL * hi.abs().max(1e-3)),
    }
}

fn details_for(
    item: &NamedInstance,
    solves: &[(Objective, SolveRow, Option<ObjectiveValues>)],
) -> Vec<GapDetail> {
    let hash = &solves[0].1.instance_hash;
    let optimal = |o: Objective| {
        solves
            .iter()
            .any(|(k, r, v)| *k == o && r.status == SolveStatus::Optimal && v.is_some())
    };
    let value = |o: Objective, f: fn(&ObjectiveValues) -> f64| {
        solves
            .iter()
            .find(|(k, ..)| *k == o)
            .and_then(|(.., v)| v.as_ref().map(f))
    };
    let pair = |lo: Objective, hi: Objective, f: fn(&ObjectiveValues) -> f64| {
        let paired = optimal(lo) && optimal(hi);
        let values: Vec<f64> = if paired {
            [value(lo, f), value(hi, f)].into_iter().flatten().collect()
        } else {
            vec![]
        };
        (paired, values)
    };
    let (rp, rv) = pair(Objective::MinRevenue, Objective::MaxRevenue, |v| v.revenue);
    let (pp, pv) = pair(
        Objective::MinPacedWelfare,
        Objective::MaxPacedWelfare,
        |v| v.paced_welfare,
    );
    // Social welfare has no objective of its own: the spread over every
    // verified solution is a lower bound on the true gap.
    let wp = rp && pp;
    let wv: Vec<f64> = if wp {
        solves
            .iter()
            .filter_map(|(.., v)| v.map(|v| v.social_welfare))
            .collect()
    } else {
        vec![]
    };
    vec![
        detail(&item.id, hash, "revenue", rp, &rv),
        detail(&item.id, hash, "paced_welfare", pp, &pv),
        detail(&item.id, hash, "social_welfare", wp, &wv),
    ]
}

/// Aggregates detail rows per measure.
pub fn summarize(detail: &[GapDetail], instances: usize) -> Vec<GapSummary> {
    MEASURES
        .iter()
        .map(|&measure| {
            let paired: Vec<&GapDetail> = detail
                .iter()
                .filter(|d| d.measure == measure && d.paired)
                .collect();
            let pct = |k: usize, of: usize| {
                if of == 0 {
                    0.0
                } else {
                    100.0 * k as f64 / of as f64
                }
            };
            let gaps: Vec<f64> = paired.iter().filter_map(|d| d.gap_pct).collect();
            let any = !paired.is_empty();
            GapSummary {
                measure: measure.into(),
                instances,
                pairs_pct: pct(paired.len(), instances),
                no_gap_pct: any.then(|| {
                    pct(
                        paired.iter().filter(|d| d.no_gap == Some(true)).count(),
                        paired.len(),
                    )
                }),
                max_gap_pct: gaps.iter().copied().reduce(f64::max),
                mean_gap_pct: any.then(|| gaps.iter().sum::<f64>() / gaps.len().max(1) as f64),
            }
        })
        .collect()
}

/// Solves every objective on every instance and reports the gaps. Solver
/// timeouts leave an instance unpaired; they are not errors.
pub fn run_gap_analysis(
    instances: &[NamedInstance],
    solver: &SolverConfig,
) -> CliResult<GapReport> {
    let per: Vec<CliResult<_>> = instances
        .par_iter()
        .map(|item| solve_all(item, solver))
        .collect();
    let mut detail = Vec::new();
    let mut solves = Vec::new();
    for (item, res) in instances.iter().zip(per) {
        let res = res?;
        detail.extend(details_for(item, &res));
        solves.extend(res.into_iter().map(|(_, row, _)| row));
    }
    Ok(GapReport {
        summary: summarize(&detail, instances.len()),
        detail,
        solves,
    })
}
