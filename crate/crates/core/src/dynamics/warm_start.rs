use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{adaptive_pacing, trace_regret, AdaptiveConfig};
use crate::error::{Error, Result};
use crate::gen::{scale_instance, ScaleConfig};
use crate::market::{PacingInstance, Tolerance};
use crate::mip::{solve_instance, Objective, SolverConfig};

/// Source of the initial multipliers of an adaptive run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitChoice {
    /// Multipliers of an equilibrium of the unscaled instance.
    Mip,
    Constant(f64),
}

impl InitChoice {
    pub fn label(&self) -> String {
        match self {
            InitChoice::Mip => "mip".into(),
            InitChoice::Constant(c) => format!("const_{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStartConfig {
    pub scales: Vec<ScaleConfig>,
    pub inits: Vec<InitChoice>,
    pub steps: Vec<f64>,
    pub alpha_mins: Vec<f64>,
    /// Objective of the equilibrium behind [`InitChoice::Mip`].
    pub objective: Objective,
    pub solver: SolverConfig,
    /// Auction tie-breaking seed.
    pub seed: u64,
    pub tol: Tolerance,
}

impl WarmStartConfig {
    /// The study grid: inits `{MIP, 0.1, 0.5, 1.0}`, `ε ∈ {0.01, 1, 2}`, `α_min ∈ {0.05, 0.1}`.
    pub fn standard(scales: Vec<ScaleConfig>) -> Self {
        Self {
            scales,
            inits: vec![
                InitChoice::Mip,
                InitChoice::Constant(0.1),
                InitChoice::Constant(0.5),
                InitChoice::Constant(1.0),
            ],
            steps: vec![0.01, 1.0, 2.0],
            alpha_mins: vec![0.05, 0.1],
            objective: Objective::Feasibility,
            solver: SolverConfig::default(),
            seed: 0,
            tol: Tolerance::default(),
        }
    }
}

/// One adaptive run of the study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStartRow {
    pub instance: usize,
    pub scale: usize,
    pub factor: usize,
    pub sigma: f64,
    pub init: String,
    pub step: f64,
    pub alpha_min: f64,
    /// The MIP found no equilibrium in time, so the run was not played.
    pub skipped: bool,
    pub max_relative_regret: Option<f64>,
    pub mean_relative_regret: Option<f64>,
    pub revenue: Option<f64>,
}

impl WarmStartRow {
    pub const CSV_HEADER: &'static str =
        "instance,scale,factor,sigma,init,step,alpha_min,skipped,max_relative_regret,mean_relative_regret,revenue";

    pub fn csv_line(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.scale,
            self.factor,
            self.sigma,
            self.init,
            self.step,
            self.alpha_min,
            self.skipped,
            opt(self.max_relative_regret),
            opt(self.mean_relative_regret),
            opt(self.revenue)
        )
    }
}

/// Runs every (scale, init, step, floor) cell on one base instance.
/// Rows are tagged with `instance_id` so studies over several instances can
/// be concatenated.
pub fn warm_start_study(
    inst: &PacingInstance,
    instance_id: usize,
    cfg: &WarmStartConfig,
) -> Result<Vec<WarmStartRow>> {
    let needs_mip = cfg.inits.contains(&InitChoice::Mip);
    let mip_alphas = if needs_mip {
        let res = solve_instance(inst, cfg.objective, &cfg.solver)?;
        res.outcome.filter(|_| res.verified).map(|o| o.alphas)
    } else {
        None
    };
    let mut rows = Vec::new();
    for (s, scale) in cfg.scales.iter().enumerate() {
        let scaled = scale_instance(inst, scale)?;
        for init in &cfg.inits {
            for &step in &cfg.steps {
                for &alpha_min in &cfg.alpha_mins {
                    let mut row = WarmStartRow {
                        instance: instance_id,
                        scale: s,
                        factor: scale.factor,
                        sigma: scale.noise_sigma,
                        init: init.label(),
                        step,
                        alpha_min,
                        skipped: false,
                        max_relative_regret: None,
                        mean_relative_regret: None,
                        revenue: None,
                    };
                    let start: Vec<f64> = match init {
                        InitChoice::Mip => match &mip_alphas {
                            Some(a) => a.clone(),
                            None => {
                                row.skipped = true;
                                rows.push(row);
                                continue;
                            }
                        },
                        InitChoice::Constant(c) => vec![*c; inst.n()],
                    };
                    let init_alphas = start.iter().map(|a| a.clamp(alpha_min, 1.0)).collect();
                    let run = AdaptiveConfig {
                        init_alphas,
                        alpha_min,
                        step,
                        seed: cfg.seed,
                    };
                    let trace = adaptive_pacing(&scaled, &run)?;
                    let report = trace_regret(&scaled.instance, &trace, &cfg.tol)?;
                    row.max_relative_regret = report.max_relative;
                    row.mean_relative_regret = report.mean_relative;
                    row.revenue = Some(trace.summary.revenue);
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

/// Best grid point of one init: the `(step, alpha_min)` pair with the lowest
/// average of the per-run maximum relative regret.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitSummary {
    pub init: String,
    pub step: f64,
    pub alpha_min: f64,
    pub mean_max_relative_regret: f64,
    /// Runs averaged.
    pub runs: usize,
    pub skipped: usize,
}

/// Grid search per init over study rows. Skipped runs and runs without a
/// defined regret are left out of the averages.
pub fn best_by_init(rows: &[WarmStartRow]) -> Result<Vec<InitSummary>> {
    let mut cells: BTreeMap<(String, u64, u64), (f64, usize, usize)> = BTreeMap::new();
    for r in rows {
        if !(r.step.is_finite() && r.alpha_min.is_finite()) {
            return Err(Error::InvalidParameter("non-finite grid value".into()));
        }
        let e = cells
            .entry((r.init.clone(), r.step.to_bits(), r.alpha_min.to_bits()))
            .or_default();
        match (r.skipped, r.max_relative_regret) {
            (true, _) => e.2 += 1,
            (false, Some(x)) => {
                e.0 += x;
                e.1 += 1;
            }
            (false, None) => {}
        }
    }
    let mut best: BTreeMap<String, InitSummary> = BTreeMap::new();
    for ((init, step, floor), (sum, runs, skipped)) in cells {
        if runs == 0 {
            continue;
        }
        let cand = InitSummary {
            init: init.clone(),
            step: f64::from_bits(step),
            alpha_min: f64::from_bits(floor),
            mean_max_relative_regret: sum / runs as f64,
            runs,
            skipped,
        };
        match best.get(&init) {
            Some(b) if b.mean_max_relative_regret <= cand.mean_max_relative_regret => {}
            _ => {
                best.insert(init, cand);
            }
        }
    }
    Ok(best.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_count_matches_grid() {
        let inst =
            PacingInstance::new(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![1.0, 1.5]).unwrap();
        let scales = vec![
            ScaleConfig {
                factor: 10,
                noise_sigma: 0.0,
                seed: 1,
            },
            ScaleConfig {
                factor: 10,
                noise_sigma: 0.1,
                seed: 2,
            },
        ];
        let cfg = WarmStartConfig::standard(scales);
        let rows = warm_start_study(&inst, 0, &cfg).unwrap();
        assert_eq!(rows.len(), 2 * 4 * 3 * 2);
        let best = best_by_init(&rows).unwrap();
        assert_eq!(best.len(), 4);
        assert!(best.iter().all(|b| b.runs == 2));
    }

    #[test]
    fn truthful_start_without_budgets_has_no_regret() {
        let inf = f64::INFINITY;
        let inst =
            PacingInstance::new(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![inf, inf]).unwrap();
        let mut cfg = WarmStartConfig::standard(vec![ScaleConfig {
            factor: 20,
            noise_sigma: 0.0,
            seed: 0,
        }]);
        cfg.inits = vec![InitChoice::Constant(1.0)];
        for r in warm_start_study(&inst, 0, &cfg).unwrap() {
            assert!(r.max_relative_regret.unwrap().abs() < 1e-9, "{r:?}");
        }
    }
}
