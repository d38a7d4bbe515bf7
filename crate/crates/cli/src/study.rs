//! Drivers for the adaptive pacing studies on many base instances.

use pacing_core::dynamics::{
    adaptive_pacing, best_by_init, empirical_allocation, warm_start_study, AdaptiveConfig,
    InitSummary, WarmStartConfig,
};
use pacing_core::gen::{scale_instance, ScaleConfig};
use pacing_core::mip::{solve_instance, Objective, SolverConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exit::CliResult;
use crate::gap::NamedInstance;
use crate::store::instance_hash;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStartPlan {
    pub factor: usize,
    pub sigmas: Vec<f64>,
    /// The base instance `k` is scaled with seed `scale_seed + k`.
    pub scale_seed: u64,
    pub study: WarmStartConfig,
}

impl WarmStartPlan {
    pub fn standard(factor: usize, scale_seed: u64) -> Self {
        Self {
            factor,
            sigmas: vec![0.0, 0.1],
            scale_seed,
            study: WarmStartConfig::standard(vec![]),
        }
    }

    fn scales(&self, k: usize) -> Vec<ScaleConfig> {
        self.sigmas
            .iter()
            .map(|&noise_sigma| ScaleConfig {
                factor: self.factor,
                noise_sigma,
                seed: self.scale_seed + k as u64,
            })
            .collect()
    }
}

/// A study row with the hash of its base instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStartCsvRow {
    pub instance: String,
    pub instance_hash: String,
    pub factor: usize,
    pub sigma: f64,
    pub init: String,
    pub step: f64,
    pub alpha_min: f64,
    pub skipped: bool,
    pub max_relative_regret: Option<f64>,
    pub mean_relative_regret: Option<f64>,
    pub revenue: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStartReport {
    pub best: Vec<InitSummary>,
    pub rows: Vec<WarmStartCsvRow>,
}

pub fn run_warm_start(
    instances: &[NamedInstance],
    plan: &WarmStartPlan,
) -> CliResult<WarmStartReport> {
    let per: Vec<CliResult<_>> = instances
        .par_iter()
        .enumerate()
        .map(|(k, item)| {
            let cfg = WarmStartConfig {
                scales: plan.scales(k),
                ..plan.study.clone()
            };
            Ok(warm_start_study(&item.instance, k, &cfg)?)
        })
        .collect();
    let mut raw = Vec::new();
    let mut rows = Vec::new();
    for (item, res) in instances.iter().zip(per) {
        let hash = instance_hash(&item.instance);
        for r in res? {
            rows.push(WarmStartCsvRow {
                instance: item.id.clone(),
                instance_hash: hash.clone(),
                factor: r.factor,
                sigma: r.sigma,
                init: r.init.clone(),
                step: r.step,
                alpha_min: r.alpha_min,
                skipped: r.skipped,
                max_relative_regret: r.max_relative_regret,
                mean_relative_regret: r.mean_relative_regret,
                revenue: r.revenue,
            });
            raw.push(r);
        }
    }
    Ok(WarmStartReport {
        best: best_by_init(&raw)?,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPlan {
    pub factor: usize,
    pub sigma: f64,
    pub alpha_min: f64,
    pub step: f64,
    pub objective: Objective,
    pub solver: SolverConfig,
    /// The base instance `k` is scaled with seed `scale_seed + k`.
    pub scale_seed: u64,
    /// Auction tie-breaking seed.
    pub seed: u64,
}

impl Default for EmpiricalPlan {
    fn default() -> Self {
        Self {
            factor: 50,
            sigma: 0.0,
            alpha_min: 0.05,
            step: 1e-4,
            objective: Objective::Feasibility,
            solver: SolverConfig::default(),
            scale_seed: 0,
            seed: 0,
        }
    }
}

/// MIP fraction against the share of copies won in the adaptive run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRow {
    pub instance: String,
    pub instance_hash: String,
    pub bidder: usize,
    pub good: usize,
    pub mip_fraction: f64,
    /// Empty when no copy of the good was sold.
    pub empirical_fraction: Option<f64>,
    pub abs_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub instances: usize,
    /// Instances without a verified MIP equilibrium.
    pub skipped: usize,
    pub cells: usize,
    pub mean_abs_diff: Option<f64>,
    pub max_abs_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub summary: EmpiricalSummary,
    pub skipped: Vec<String>,
    pub rows: Vec<EmpiricalRow>,
}

fn empirical_one(
    k: usize,
    item: &NamedInstance,
    plan: &EmpiricalPlan,
) -> CliResult<Option<Vec<EmpiricalRow>>> {
    let res = solve_instance(&item.instance, plan.objective, &plan.solver)?;
    let Some(out) = res.outcome.filter(|_| res.verified) else {
        return Ok(None);
    };
    let scaled = scale_instance(
        &item.instance,
        &ScaleConfig {
            factor: plan.factor,
            noise_sigma: plan.sigma,
            seed: plan.scale_seed + k as u64,
        },
    )?;
    let init_alphas = out
        .alphas
        .iter()
        .map(|a| a.clamp(plan.alpha_min, 1.0))
        .collect();
    let run = AdaptiveConfig {
        init_alphas,
        alpha_min: plan.alpha_min,
        step: plan.step,
        seed: plan.seed,
    };
    let trace = adaptive_pacing(&scaled, &run)?;
    let emp = empirical_allocation(&scaled, &trace)?;
    let hash = instance_hash(&item.instance);
    let mut rows = Vec::new();
    for (i, row) in emp.iter().enumerate() {
        for (j, &f) in row.iter().enumerate() {
            let mip = out.fractions[i][j];
            rows.push(EmpiricalRow {
                instance: item.id.clone(),
                instance_hash: hash.clone(),
                bidder: i,
                good: j,
                mip_fraction: mip,
                empirical_fraction: f,
                abs_diff: f.map(|f| (f - mip).abs()),
            });
        }
    }
    Ok(Some(rows))
}

/// Seeds adaptive pacing from a MIP equilibrium of each base instance and
/// compares the realized allocation with the equilibrium fractions.
pub fn run_empirical_match(
    instances: &[NamedInstance],
    plan: &EmpiricalPlan,
) -> CliResult<EmpiricalReport> {
    let per: Vec<CliResult<_>> = instances
        .par_iter()
        .enumerate()
        .map(|(k, it)| empirical_one(k, it, plan))
        .collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (item, res) in instances.iter().zip(per) {
        match res? {
            Some(r) => rows.extend(r),
            None => skipped.push(item.id.clone()),
        }
    }
    let diffs: Vec<f64> = rows.iter().filter_map(|r| r.abs_diff).collect();
    let summary = EmpiricalSummary {
        instances: instances.len(),
        skipped: skipped.len(),
        cells: diffs.len(),
        mean_abs_diff: (!diffs.is_empty()).then(|| diffs.iter().sum::<f64>() / diffs.len() as f64),
        max_abs_diff: diffs.iter().copied().reduce(f64::max),
    };
    Ok(EmpiricalReport {
        summary,
        skipped,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use pacing_core::PacingInstance;

    #[test]
    fn lone_bidder_wins_everything() {
        let inst = PacingInstance::new(vec![vec![1.0, 2.0]], vec![f64::INFINITY]).unwrap();
        let item = NamedInstance {
            id: "solo".into(),
            instance: inst,
        };
        let rep = run_empirical_match(
            &[item],
            &EmpiricalPlan {
                factor: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(rep.summary.cells, 2);
        assert_eq!(rep.summary.max_abs_diff, Some(0.0));
    }

    #[test]
    fn warm_start_rows_carry_hashes() {
        let inst =
            PacingInstance::new(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![1.0, 1.5]).unwrap();
        let hash = instance_hash(&inst);
        let item = NamedInstance {
            id: "a".into(),
            instance: inst,
        };
        let rep = run_warm_start(&[item], &WarmStartPlan::standard(5, 1)).unwrap();
        assert_eq!(rep.rows.len(), 2 * 4 * 3 * 2);
        assert!(rep.rows.iter().all(|r| r.instance_hash == hash));
        assert_eq!(rep.best.len(), 4);
    }
}
