//! Share of generated instances the MIP solves within its time limit.

use std::collections::BTreeMap;

use pacing_core::gen::{gen_stylized, GenConfig, InstanceKind};
use pacing_core::mip::{solve_instance, Objective, SolveStatus, SolverConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exit::CliResult;
use crate::store::instance_hash;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityConfig {
    pub kinds: Vec<InstanceKind>,
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    pub per_cell: usize,
    /// Seed of the first instance; each further instance adds one.
    pub base_seed: u64,
    pub sigma: f64,
    pub objectives: Vec<Objective>,
    pub solver: SolverConfig,
}

impl Default for ScalabilityConfig {
    fn default() -> Self {
        Self {
            kinds: InstanceKind::ALL.to_vec(),
            ns: vec![2, 3, 4],
            ms: vec![2, 4, 6],
            per_cell: 3,
            base_seed: 0,
            sigma: 0.1,
            objectives: Objective::ALL.to_vec(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityDetail {
    pub objective: String,
    pub kind: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub instance_hash: String,
    pub status: SolveStatus,
    pub verified: bool,
    pub solved: bool,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityRow {
    pub objective: String,
    pub kind: String,
    pub n: usize,
    pub m: usize,
    pub instances: usize,
    pub solved: usize,
    pub solved_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityReport {
    pub table: Vec<ScalabilityRow>,
    pub detail: Vec<ScalabilityDetail>,
}

/// Solved means optimal with a verified outcome.
fn solved(status: SolveStatus, verified: bool) -> bool {
    status == SolveStatus::Optimal && verified
}

pub fn run_scalability(cfg: &ScalabilityConfig) -> CliResult<ScalabilityReport> {
    let mut gens = Vec::new();
    let mut seed = cfg.base_seed;
    for &kind in &cfg.kinds {
        for &n in &cfg.ns {
            for &m in &cfg.ms {
                for _ in 0..cfg.per_cell {
                    gens.push(GenConfig::new(kind, n, m, seed).with_sigma(cfg.sigma));
                    seed += 1;
                }
            }
        }
    }
    let jobs: Vec<(usize, Objective)> = (0..gens.len())
        .flat_map(|g| cfg.objectives.iter().map(move |&o| (g, o)))
        .collect();
    let instances = gens
        .iter()
        .map(gen_stylized)
        .collect::<Result<Vec<_>, _>>()?;
    let hashes: Vec<String> = instances.iter().map(instance_hash).collect();
    let results: Vec<CliResult<ScalabilityDetail>> = jobs
        .par_iter()
        .map(|&(g, obj)| {
            let res = solve_instance(&instances[g], obj, &cfg.solver)?;
            Ok(ScalabilityDetail {
                objective: obj.name().into(),
                kind: gens[g].kind.name().into(),
                n: gens[g].n,
                m: gens[g].m,
                seed: gens[g].seed,
                instance_hash: hashes[g].clone(),
                status: res.status,
                verified: res.verified,
                solved: solved(res.status, res.verified),
                nodes: res.stats.nodes,
            })
        })
        .collect();
    let detail = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    let mut cells: BTreeMap<(usize, usize, usize, usize), (usize, usize)> = BTreeMap::new();
    let obj_pos = |name: &str| {
        cfg.objectives
            .iter()
            .position(|o| o.name() == name)
            .expect("known objective")
    };
    let kind_pos = |name: &str| {
        cfg.kinds
            .iter()
            .position(|k| k.name() == name)
            .expect("known kind")
    };
    for d in &detail {
        let e = cells
            .entry((obj_pos(&d.objective), kind_pos(&d.kind), d.n, d.m))
            .or_default();
        e.0 += 1;
        e.1 += usize::from(d.solved);
    }
    let table = cells
        .into_iter()
        .map(|((o, k, n, m), (total, ok))| ScalabilityRow {
            objective: cfg.objectives[o].name().into(),
            kind: cfg.kinds[k].name().into(),
            n,
            m,
            instances: total,
            solved: ok,
            solved_pct: 100.0 * ok as f64 / total as f64,
        })
        .collect();
    Ok(ScalabilityReport { table, detail })
}
