//! Iterative bidding procedures and their diagnostics.
//!
//! * [`br_dynamics`]: rounds of exact best responses on a fixed instance.
//! * [`adaptive_pacing`]: per-auction multiplier updates on a scaled instance.
//! * [`regret`] and [`trace_regret`]: realized utility against the best
//!   response to the same rival bids.
//! * [`empirical_allocation`]: per-type win shares of an adaptive run.
//! * [`stability_check`]: rate conditions of the limit dynamics.
//! * [`warm_start_study`]: grid of adaptive runs seeded from the MIP or constants.

mod adaptive;
mod br;
mod empirical;
mod regret;
mod stability;
mod warm_start;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use adaptive::{adaptive_pacing, update_multiplier, AdaptiveConfig};
pub use br::{br_dynamics, BrConfig, BrInit, Schedule};
pub use empirical::empirical_allocation;
pub use regret::{overspend_penalty, regret, trace_regret, BidderRegret, RegretReport};
pub use stability::{stability_check, Drift, StabilityVerdict};
pub use warm_start::{
    best_by_init, warm_start_study, InitChoice, InitSummary, WarmStartConfig, WarmStartRow,
};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    BestResponse,
    Adaptive,
}

/// One iteration of best-response dynamics or one auction of an adaptive run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Iteration number (1 = starting profile) or auction index (0-based).
    pub step: usize,
    /// Multipliers in force during this step.
    pub alphas: Vec<f64>,
    /// Auctions covered by this step.
    pub goods: Vec<usize>,
    /// `bids[i][k]` is bidder `i`'s bid on `goods[k]`.
    pub bids: Vec<Vec<f64>>,
    pub winners: Vec<Option<usize>>,
    pub prices: Vec<f64>,
    /// Amount each bidder paid in this step.
    pub spends: Vec<f64>,
    /// Budget left after this step; the full budget minus `spends` for best-response runs.
    #[serde(with = "crate::market::instance::budget_list")]
    pub remaining: Vec<f64>,
    /// Largest multiplier change from the previous step.
    pub max_change: f64,
    /// Largest relative regret of the realized outcome, best-response runs only.
    pub max_relative_regret: Option<f64>,
}

/// A detected repeat of an earlier best-response profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    /// Iteration whose profile reappears.
    pub first: usize,
    /// Iteration at which it reappears.
    pub repeat: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub steps: usize,
    /// Best-response runs: the last change fell below the tolerance.
    pub converged: bool,
    pub cycle: Option<Cycle>,
    pub final_alphas: Vec<f64>,
    /// Total payment of each bidder over the recorded steps.
    pub total_spend: Vec<f64>,
    pub revenue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsTrace {
    pub kind: TraceKind,
    /// Seed of the auction tie-breaking stream.
    pub seed: u64,
    pub records: Vec<TraceRecord>,
    pub summary: TraceSummary,
}

impl DynamicsTrace {
    /// One JSON object per record, followed by a summary line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        let tail =
            serde_json::json!({ "kind": self.kind, "seed": self.seed, "summary": self.summary });
        out.push_str(&tail.to_string());
        out.push('\n');
        out
    }

    /// Inverse of [`DynamicsTrace::to_json_lines`].
    pub fn from_json_lines(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Tail {
            kind: TraceKind,
            seed: u64,
            summary: TraceSummary,
        }
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let (last, body) = lines
            .split_last()
            .ok_or_else(|| crate::Error::Json("empty trace".into()))?;
        let tail: Tail = serde_json::from_str(last)?;
        let records = body
            .iter()
            .map(|l| serde_json::from_str(l))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self {
            kind: tail.kind,
            seed: tail.seed,
            records,
            summary: tail.summary,
        })
    }
}

/// Single-item second-price auction with a uniformly random winner among
/// bids within `tie` of the top. Returns the winner and the highest other bid.
pub(crate) fn second_price<R: Rng>(bids: &[f64], tie: f64, rng: &mut R) -> Option<(usize, f64)> {
    let top = bids.iter().copied().fold(0.0, f64::max);
    if top <= 0.0 {
        return None;
    }
    let tied: Vec<usize> = (0..bids.len()).filter(|&i| bids[i] >= top - tie).collect();
    let winner = tied[rng.random_range(0..tied.len())];
    let price = (0..bids.len())
        .filter(|&k| k != winner)
        .map(|k| bids[k])
        .fold(0.0, f64::max);
    Some((winner, price))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::rng;

    #[test]
    fn second_price_charges_runner_up() {
        let mut r = rng(1);
        assert_eq!(second_price(&[3.0, 5.0, 4.0], 1e-9, &mut r), Some((1, 4.0)));
        assert_eq!(second_price(&[0.0, 0.0], 1e-9, &mut r), None);
    }

    #[test]
    fn ties_are_split_at_random() {
        let mut r = rng(7);
        let mut wins = [0; 2];
        for _ in 0..400 {
            let (w, p) = second_price(&[2.0, 2.0], 1e-9, &mut r).unwrap();
            assert_eq!(p, 2.0);
            wins[w] += 1;
        }
        assert!(wins[0] > 150 && wins[1] > 150);
    }
}
