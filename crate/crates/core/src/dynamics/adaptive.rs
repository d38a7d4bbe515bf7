use serde::{Deserialize, Serialize};

use super::{second_price, DynamicsTrace, TraceKind, TraceRecord, TraceSummary};
use crate::error::{Error, Result};
use crate::gen::{rng, ScaledInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    pub init_alphas: Vec<f64>,
    pub alpha_min: f64,
    /// Step size `ε`.
    pub step: f64,
    /// Seed for random auction tie-breaking.
    pub seed: u64,
}

impl AdaptiveConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha_min > 0.0 && self.alpha_min <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha_min {} outside (0, 1]",
                self.alpha_min
            )));
        }
        if !(self.step >= 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step {} must be finite and >= 0",
                self.step
            )));
        }
        if self.init_alphas.len() != n {
            return Err(Error::Dimension(format!(
                "{} initial multipliers for {n} bidders",
                self.init_alphas.len()
            )));
        }
        if self
            .init_alphas
            .iter()
            .any(|a| !(self.alpha_min..=1.0).contains(a))
        {
            return Err(Error::InvalidParameter(
                "initial multipliers must lie in [alpha_min, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// `max(α_min, 1 / max(1, 1/α − ε(ρ − s)))`.
///
/// ```
/// use pacing_core::dynamics::update_multiplier;
/// let a = update_multiplier(0.5, 0.1, 1.0, 0.0, 0.05);
/// assert!((a - 1.0 / 1.9).abs() < 1e-12);
/// ```
pub fn update_multiplier(alpha: f64, step: f64, rate: f64, spend: f64, alpha_min: f64) -> f64 {
    if step == 0.0 {
        return alpha.clamp(alpha_min, 1.0);
    }
    let inv = 1.0 / alpha - step * (rate - spend);
    (1.0 / inv.max(1.0)).max(alpha_min)
}

/// Runs the adaptive pacing algorithm over the auctions of `scaled` in index
/// order. Each bidder bids `min(v α, remaining budget)`, the top bidder wins
/// (uniformly at random among ties) and pays the highest other bid, and every
/// bidder then updates its multiplier toward the target spend rate
/// `ρ_i = B_i / (number of auctions)`.
pub fn adaptive_pacing(scaled: &ScaledInstance, cfg: &AdaptiveConfig) -> Result<DynamicsTrace> {
    let inst = &scaled.instance;
    let (n, m) = (inst.n(), inst.m());
    cfg.validate(n)?;
    let rates: Vec<f64> = inst.budgets().iter().map(|b| b / m as f64).collect();
    let mut remaining = inst.budgets().to_vec();
    let mut alphas = cfg.init_alphas.clone();
    let mut ties = rng(cfg.seed);
    let mut records = Vec::with_capacity(m);
    let mut total_spend = vec![0.0; n];
    let mut change = 0.0;
    for j in 0..m {
        let bids: Vec<f64> = (0..n)
            .map(|i| (inst.value(i, j) * alphas[i]).min(remaining[i]))
            .collect();
        let sale = second_price(&bids, 0.0, &mut ties);
        let mut spends = vec![0.0; n];
        if let Some((w, p)) = sale {
            spends[w] = p;
            remaining[w] -= p;
            total_spend[w] += p;
        }
        let next: Vec<f64> = (0..n)
            .map(|i| update_multiplier(alphas[i], cfg.step, rates[i], spends[i], cfg.alpha_min))
            .collect();
        records.push(TraceRecord {
            step: j,
            alphas: alphas.clone(),
            goods: vec![j],
            bids: bids.iter().map(|&b| vec![b]).collect(),
            winners: vec![sale.map(|s| s.0)],
            prices: vec![sale.map_or(0.0, |s| s.1)],
            spends,
            remaining: remaining.clone(),
            max_change: change,
            max_relative_regret: None,
        });
        change = next
            .iter()
            .zip(&alphas)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        alphas = next;
    }
    let revenue = total_spend.iter().sum();
    Ok(DynamicsTrace {
        kind: TraceKind::Adaptive,
        seed: cfg.seed,
        summary: TraceSummary {
            steps: records.len(),
            converged: false,
            cycle: None,
            final_alphas: alphas,
            total_spend,
            revenue,
        },
        records,
    })
}
