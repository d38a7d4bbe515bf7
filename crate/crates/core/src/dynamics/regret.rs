use serde::{Deserialize, Serialize};

use super::{DynamicsTrace, TraceKind};
use crate::error::{Error, Result};
use crate::market::{best_response_with, PacingInstance, TieBreak, Tolerance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidderRegret {
    pub bidder: usize,
    pub value_won: f64,
    pub spend: f64,
    /// Spend above the budget.
    pub overspend: f64,
    /// Paced bids times fractions won.
    pub paced_welfare: f64,
    pub penalty: f64,
    /// Value won minus spend minus penalty.
    pub realized_utility: f64,
    pub best_utility: f64,
    pub absolute: f64,
    /// `None` when the best-response utility is not positive.
    pub relative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub bidders: Vec<BidderRegret>,
    /// Over bidders with a defined relative regret.
    pub max_relative: Option<f64>,
    pub mean_relative: Option<f64>,
}

impl RegretReport {
    pub const CSV_HEADER: &'static str =
        "bidder,value_won,spend,overspend,paced_welfare,penalty,realized_utility,best_utility,absolute,relative";

    /// One row per bidder; an undefined relative regret is left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for b in &self.bidders {
            let rel = b.relative.map(|r| r.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                b.bidder,
                b.value_won,
                b.spend,
                b.overspend,
                b.paced_welfare,
                b.penalty,
                b.realized_utility,
                b.best_utility,
                b.absolute,
                rel
            ));
        }
        out
    }
}

/// Utility deduction for spending above the budget:
/// `overspend · (spend / budget) · (paced_welfare / budget)`.
///
/// ```
/// use pacing_core::dynamics::overspend_penalty;
/// assert_eq!(overspend_penalty(90.0, 100.0, 50.0), 0.0);
/// let p = overspend_penalty(110.0, 100.0, 50.0);
/// assert!((p - 10.0 * 1.1 * 0.5).abs() < 1e-12);
/// ```
pub fn overspend_penalty(spend: f64, budget: f64, paced_welfare: f64) -> f64 {
    if !budget.is_finite() || spend <= budget {
        return 0.0;
    }
    (spend - budget) * (spend / budget) * (paced_welfare / budget)
}

/// Regret of every bidder in a realized outcome given as full bid, fraction
/// and price matrices. The best response is computed against the realized
/// bids of the other bidders.
pub fn regret(
    inst: &PacingInstance,
    bids: &[Vec<f64>],
    fractions: &[Vec<f64>],
    prices: &[f64],
    tol: &Tolerance,
) -> Result<RegretReport> {
    let (n, m) = (inst.n(), inst.m());
    let shaped = |rows: &[Vec<f64>]| rows.len() == n && rows.iter().all(|r| r.len() == m);
    if !shaped(bids) || !shaped(fractions) || prices.len() != m {
        return Err(Error::Dimension(
            "bids and fractions must be n x m with m prices".into(),
        ));
    }
    let mut bidders = Vec::with_capacity(n);
    for i in 0..n {
        let (mut value_won, mut spend, mut paced_welfare) = (0.0, 0.0, 0.0);
        for j in 0..m {
            let x = fractions[i][j];
            value_won += x * inst.value(i, j);
            spend += x * prices[j];
            paced_welfare += x * bids[i][j];
        }
        let budget = inst.budget(i);
        let penalty = overspend_penalty(spend, budget, paced_welfare);
        let realized = value_won - spend - penalty;
        let best = best_response_with(inst, i, bids, TieBreak::High, tol)?.utility;
        bidders.push(BidderRegret {
            bidder: i,
            value_won,
            spend,
            overspend: (spend - budget).max(0.0),
            paced_welfare,
            penalty,
            realized_utility: realized,
            best_utility: best,
            absolute: best - realized,
            relative: (best > tol.eps_feas).then(|| (best - realized) / best),
        });
    }
    let defined: Vec<f64> = bidders.iter().filter_map(|b| b.relative).collect();
    let max_relative = defined.iter().copied().reduce(f64::max);
    let mean_relative =
        (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(RegretReport {
        bidders,
        max_relative,
        mean_relative,
    })
}

/// Regret of the final bids of a trace. Best-response traces use their last
/// iteration; adaptive traces use every auction of `inst`, which must be the
/// scaled instance the run was played on.
pub fn trace_regret(
    inst: &PacingInstance,
    trace: &DynamicsTrace,
    tol: &Tolerance,
) -> Result<RegretReport> {
    let (n, m) = (inst.n(), inst.m());
    let mut bids = vec![vec![0.0; m]; n];
    let mut fractions = vec![vec![0.0; m]; n];
    let mut prices = vec![0.0; m];
    let records = match trace.kind {
        TraceKind::BestResponse => trace.records.last().into_iter().collect::<Vec<_>>(),
        TraceKind::Adaptive => trace.records.iter().collect(),
    };
    for r in records {
        for (k, &j) in r.goods.iter().enumerate() {
            if j >= m || r.bids.len() != n {
                return Err(Error::Dimension(format!(
                    "trace record {} does not match the instance",
                    r.step
                )));
            }
            for i in 0..n {
                bids[i][j] = r.bids[i][k];
            }
            prices[j] = r.prices[k];
            if let Some(w) = r.winners[k] {
                fractions[w][j] = 1.0;
            }
        }
    }
    regret(inst, &bids, &fractions, &prices, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truthful_unconstrained_winner_has_no_regret() {
        let inst = PacingInstance::new(
            vec![vec![10.0], vec![4.0]],
            vec![f64::INFINITY, f64::INFINITY],
        )
        .unwrap();
        let bids = inst.paced_bids(&[1.0, 1.0]);
        let rep = regret(
            &inst,
            &bids,
            &[vec![1.0], vec![0.0]],
            &[4.0],
            &Tolerance::default(),
        )
        .unwrap();
        assert!(rep.bidders[0].absolute.abs() < 1e-12);
        assert_eq!(rep.bidders[0].relative, Some(0.0));
        // The loser cannot profit at price 10 with value 4.
        assert_eq!(rep.bidders[1].relative, None);
        assert_eq!(rep.max_relative, Some(0.0));
    }

    #[test]
    fn penalty_enters_realized_utility() {
        // Bidder 0 wins at price 11 on a budget of 10: 10% over.
        let inst = PacingInstance::new(vec![vec![20.0], vec![11.0]], vec![10.0, 100.0]).unwrap();
        let bids = vec![vec![20.0], vec![11.0]];
        let rep = regret(
            &inst,
            &bids,
            &[vec![1.0], vec![0.0]],
            &[11.0],
            &Tolerance::default(),
        )
        .unwrap();
        let b = &rep.bidders[0];
        let expected = 1.0 * 1.1 * (20.0 / 10.0);
        assert!((b.penalty - expected).abs() < 1e-12);
        assert!((b.realized_utility - (20.0 - 11.0 - expected)).abs() < 1e-12);
        // Best response: tie at 11 and take 10/11 of the good within budget.
        assert!((b.best_utility - (20.0 - 11.0) * 10.0 / 11.0).abs() < 1e-9);
    }

    #[test]
    fn csv_has_one_row_per_bidder() {
        let inst = PacingInstance::new(vec![vec![1.0], vec![1.0]], vec![5.0, 5.0]).unwrap();
        let bids = inst.paced_bids(&[1.0, 1.0]);
        let rep = regret(
            &inst,
            &bids,
            &[vec![1.0], vec![0.0]],
            &[1.0],
            &Tolerance::default(),
        )
        .unwrap();
        let csv = rep.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("bidder,"));
    }
}
