//! Randomized search for Pareto improvements over an outcome.
//!
//! Parties are the bidders, with quasi-linear utility `Σ_j x_ij v_ij − t_i`
//! and payment cap `t_i <= B_i`, and the seller, who collects `Σ_i min(t_i, B_i)`.
//! The probe proposes reallocations, re-prices them so every party shares the
//! surplus change, and reports the first proposal that respects all budgets.
//! It can only find counterexamples, never prove their absence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instance::PacingInstance;
use super::outcome::PacingOutcome;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub trials: usize,
    /// Largest fraction of a good moved in one proposal.
    pub radius: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            radius: 0.1,
            seed: 0,
        }
    }
}

/// A feasible allocation and payment vector that dominates the probed outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dominating {
    pub fractions: Vec<Vec<f64>>,
    pub payments: Vec<f64>,
    /// Utility gain of each bidder, seller last.
    pub gains: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum ProbeVerdict {
    NoDominatingFound,
    Counterexample(Dominating),
}

impl ProbeVerdict {
    pub fn found(&self) -> bool {
        matches!(self, ProbeVerdict::Counterexample(_))
    }
}

/// Searches for an allocation and payments that make nobody worse off and
/// somebody strictly better off.
pub fn pareto_probe(
    inst: &PacingInstance,
    out: &PacingOutcome,
    cfg: &ProbeConfig,
) -> Result<ProbeVerdict> {
    out.check_shape(inst)?;
    let (n, m) = (inst.n(), inst.m());
    let payments: Vec<f64> = (0..n).map(|i| out.bidder_spend(i)).collect();
    let scale = 1.0
        + inst
            .values()
            .iter()
            .flatten()
            .fold(0.0_f64, |a, &b| a.max(b));

    // Payments above a budget cannot be collected: refunding the excess helps
    // the bidder and leaves the seller's collectible revenue unchanged.
    if (0..n).any(|i| payments[i] > inst.budget(i) * (1.0 + 1e-9) + 1e-9) {
        let capped: Vec<f64> = (0..n).map(|i| payments[i].min(inst.budget(i))).collect();
        let mut gains: Vec<f64> = (0..n).map(|i| payments[i] - capped[i]).collect();
        gains.push(0.0);
        return Ok(ProbeVerdict::Counterexample(Dominating {
            fractions: out.fractions.clone(),
            payments: capped,
            gains,
        }));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Holder index `n` stands for the seller's unallocated share.
    let holding = |x: &[Vec<f64>], h: usize, j: usize| -> f64 {
        if h < n {
            x[h][j]
        } else {
            (1.0 - (0..n).map(|i| x[i][j]).sum::<f64>()).max(0.0)
        }
    };
    for _ in 0..cfg.trials {
        let mut x = out.fractions.clone();
        let moves = rng.random_range(1..=2.min(m).max(1));
        for _ in 0..moves {
            let j = rng.random_range(0..m);
            let from = rng.random_range(0..=n);
            let to = rng.random_range(0..n);
            if from == to {
                continue;
            }
            let avail = holding(&x, from, j);
            if avail <= 0.0 {
                continue;
            }
            let delta = avail.min(cfg.radius) * rng.random::<f64>();
            if from < n {
                x[from][j] -= delta;
            }
            x[to][j] += delta;
        }
        let value_change: Vec<f64> = (0..n)
            .map(|i| {
                (0..m)
                    .map(|j| (x[i][j] - out.fractions[i][j]) * inst.value(i, j))
                    .sum()
            })
            .collect();
        let surplus: f64 = value_change.iter().sum();
        if surplus <= 1e-9 * scale {
            continue;
        }
        let share = surplus / (n as f64 + 1.0);
        let new_pay: Vec<f64> = (0..n)
            .map(|i| payments[i] + value_change[i] - share)
            .collect();
        if (0..n).all(|i| new_pay[i] <= inst.budget(i)) {
            return Ok(ProbeVerdict::Counterexample(Dominating {
                fractions: x,
                payments: new_pay,
                gains: vec![share; n + 1],
            }));
        }
    }
    Ok(ProbeVerdict::NoDominatingFound)
}
