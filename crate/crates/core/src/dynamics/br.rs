use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{regret, second_price, Cycle, DynamicsTrace, TraceKind, TraceRecord, TraceSummary};
use crate::error::{Error, Result};
use crate::gen::rng;
use crate::market::{best_response_with, evaluate_response, PacingInstance, TieBreak, Tolerance};

/// Order of updates within a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Every bidder responds to the profile at the start of the round.
    #[default]
    Simultaneous,
    /// Bidders respond in index order to the latest multipliers.
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrInit {
    /// Independent `U[0, 1]` multipliers.
    Random {
        seed: u64,
    },
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrConfig {
    pub tie_break: TieBreak,
    /// Maximum number of rounds.
    pub max_iters: usize,
    pub init: BrInit,
    /// Stop once no multiplier moves by this much in a round.
    pub convergence_tol: f64,
    pub schedule: Schedule,
    /// Seed for random auction tie-breaking in the recorded outcomes.
    pub seed: u64,
    pub tol: Tolerance,
}

impl BrConfig {
    pub fn new(init: BrInit) -> Self {
        Self {
            tie_break: TieBreak::High,
            max_iters: 100,
            init,
            convergence_tol: 1e-9,
            schedule: Schedule::Simultaneous,
            seed: 0,
            tol: Tolerance::default(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        if !(self.convergence_tol >= 0.0 && self.convergence_tol.is_finite()) {
            return Err(Error::InvalidParameter(
                "convergence_tol must be finite and >= 0".into(),
            ));
        }
        if let BrInit::Given(a) = &self.init {
            if a.len() != n {
                return Err(Error::Dimension(format!(
                    "{} initial multipliers for {n} bidders",
                    a.len()
                )));
            }
            if a.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::InvalidParameter(
                    "initial multipliers must lie in [0, 1]".into(),
                ));
            }
        }
        Ok(())
    }
}

/// New multiplier of bidder `i` against `profile`. A bidder whose budget
/// binds and whose current multiplier is already optimal keeps it.
fn respond(inst: &PacingInstance, i: usize, profile: &[f64], cfg: &BrConfig) -> Result<f64> {
    let bids = inst.paced_bids(profile);
    let br = best_response_with(inst, i, &bids, cfg.tie_break, &cfg.tol)?;
    let now = evaluate_response(inst, i, &bids, profile[i], &cfg.tol)?;
    let slack = cfg.tol.eps_feas * (1.0 + br.utility.abs());
    if !now.over_budget && now.budget_binding && now.utility >= br.utility - slack {
        return Ok(profile[i]);
    }
    Ok(br.alpha)
}

fn round(inst: &PacingInstance, profile: &[f64], cfg: &BrConfig) -> Result<Vec<f64>> {
    let mut next = profile.to_vec();
    for i in 0..inst.n() {
        let basis = match cfg.schedule {
            Schedule::Simultaneous => profile,
            Schedule::Sequential => &next,
        };
        next[i] = respond(inst, i, basis, cfg)?;
    }
    Ok(next)
}

/// Outcome of one day at fixed multipliers, whole goods to random tied winners.
fn play<R: Rng>(
    inst: &PacingInstance,
    alphas: &[f64],
    step: usize,
    max_change: f64,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<TraceRecord> {
    let (n, m) = (inst.n(), inst.m());
    let bids = inst.paced_bids(alphas);
    let mut winners = Vec::with_capacity(m);
    let mut prices = vec![0.0; m];
    let mut spends = vec![0.0; n];
    let mut fractions = vec![vec![0.0; m]; n];
    for j in 0..m {
        let column: Vec<f64> = (0..n).map(|i| bids[i][j]).collect();
        let sale = second_price(&column, tol.eps_tie, rng);
        if let Some((w, p)) = sale {
            prices[j] = p;
            spends[w] += p;
            fractions[w][j] = 1.0;
        }
        winners.push(sale.map(|s| s.0));
    }
    let report = regret(inst, &bids, &fractions, &prices, tol)?;
    Ok(TraceRecord {
        step,
        alphas: alphas.to_vec(),
        goods: (0..m).collect(),
        remaining: (0..n).map(|i| inst.budget(i) - spends[i]).collect(),
        bids,
        winners,
        prices,
        spends,
        max_change,
        max_relative_regret: report.max_relative,
    })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Best-response dynamics from the configured start.
///
/// Iteration 1 records the starting profile; each later iteration records
/// the profile after one round of best responses. The run stops when a round
/// moves no multiplier by `convergence_tol` or more, when a profile repeats
/// an earlier one (a cycle), or after `max_iters` rounds.
///
/// ```
/// use pacing_core::dynamics::{br_dynamics, BrConfig, BrInit};
/// use pacing_core::PacingInstance;
/// let inst = PacingInstance::new(vec![vec![3.0, 1.0]], vec![f64::INFINITY]).unwrap();
/// let trace = br_dynamics(&inst, &BrConfig::new(BrInit::Given(vec![0.4]))).unwrap();
/// assert_eq!(trace.summary.final_alphas, vec![1.0]);
/// assert!(trace.summary.converged);
/// ```
pub fn br_dynamics(inst: &PacingInstance, cfg: &BrConfig) -> Result<DynamicsTrace> {
    let n = inst.n();
    cfg.validate(n)?;
    let mut profile = match &cfg.init {
        BrInit::Given(a) => a.clone(),
        BrInit::Random { seed } => {
            let mut r = rng(*seed);
            (0..n).map(|_| r.random_range(0.0..=1.0)).collect()
        }
    };
    let mut ties = rng(cfg.seed);
    let mut records: Vec<TraceRecord> = Vec::new();
    let mut history: Vec<Vec<f64>> = Vec::new();
    let (mut converged, mut cycle) = (false, None);
    let mut change = 0.0;
    for step in 1.. {
        records.push(play(inst, &profile, step, change, &cfg.tol, &mut ties)?);
        if step > 1 && change < cfg.convergence_tol {
            converged = true;
            break;
        }
        let earlier = history.len().saturating_sub(1);
        if let Some(k) = history[..earlier]
            .iter()
            .position(|h| max_diff(h, &profile) < cfg.convergence_tol.max(1e-12))
        {
            cycle = Some(Cycle {
                first: k + 1,
                repeat: step,
            });
            break;
        }
        history.push(profile.clone());
        if step > cfg.max_iters {
            break;
        }
        let next = round(inst, &profile, cfg)?;
        change = max_diff(&next, &profile);
        profile = next;
    }
    let mut total_spend = vec![0.0; n];
    for r in &records {
        for i in 0..n {
            total_spend[i] += r.spends[i];
        }
    }
    let revenue = total_spend.iter().sum();
    Ok(DynamicsTrace {
        kind: TraceKind::BestResponse,
        seed: cfg.seed,
        summary: TraceSummary {
            steps: records.len(),
            converged,
            cycle,
            final_alphas: profile,
            total_spend,
            revenue,
        },
        records,
    })
}
