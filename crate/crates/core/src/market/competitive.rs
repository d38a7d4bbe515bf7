//! Competitive equilibria with budgets and the translations to and from
//! pacing equilibria.

use serde::{Deserialize, Serialize};

use super::instance::PacingInstance;
use super::outcome::{PacingOutcome, Tolerance};
use super::verify::{verify_equilibrium, violation, Condition, Verdict, ViolationCode};
use crate::error::{Error, Result};

/// Item prices plus a fractional allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetitiveOutcome {
    pub prices: Vec<f64>,
    pub fractions: Vec<Vec<f64>>,
}

impl CompetitiveOutcome {
    pub fn bidder_spend(&self, i: usize) -> f64 {
        self.fractions[i]
            .iter()
            .zip(&self.prices)
            .map(|(x, p)| x * p)
            .sum()
    }

    pub fn revenue(&self) -> f64 {
        (0..self.fractions.len())
            .map(|i| self.bidder_spend(i))
            .sum()
    }

    fn check_shape(&self, inst: &PacingInstance) -> Result<()> {
        if self.prices.len() != inst.m()
            || self.fractions.len() != inst.n()
            || self.fractions.iter().any(|r| r.len() != inst.m())
        {
            return Err(Error::Dimension(
                "competitive outcome does not match instance".into(),
            ));
        }
        if self
            .prices
            .iter()
            .chain(self.fractions.iter().flatten())
            .any(|x| x.is_nan())
        {
            return Err(Error::NonFinite("NaN in competitive outcome".into()));
        }
        Ok(())
    }
}

/// Best utility bidder `i` can buy at `prices` within its budget.
///
/// Free goods are taken whole; priced goods with `v > p` are bought in
/// decreasing bang-per-buck order until the budget runs out.
pub fn demand_utility(inst: &PacingInstance, i: usize, prices: &[f64]) -> f64 {
    let mut utility = 0.0;
    let mut priced: Vec<(f64, f64, f64)> = Vec::new();
    for (j, &p) in prices.iter().enumerate() {
        let v = inst.value(i, j);
        if p <= 0.0 {
            utility += v;
        } else if v > p {
            priced.push((v / p, v, p));
        }
    }
    priced.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut left = inst.budget(i);
    for (_, v, p) in priced {
        if left <= 0.0 {
            break;
        }
        let f = (left / p).min(1.0);
        utility += f * (v - p);
        left -= f * p;
    }
    utility
}

/// Checks budget feasibility, demand optimality and market clearing.
///
/// A bundle is demand-optimal when it attains [`demand_utility`], which is the
/// bang-per-buck characterization of utility-maximizing bundles.
pub fn verify_competitive(
    inst: &PacingInstance,
    ce: &CompetitiveOutcome,
    tol: &Tolerance,
) -> Result<Verdict> {
    use Condition::*;
    use ViolationCode::*;
    ce.check_shape(inst)?;
    let (n, m) = (inst.n(), inst.m());
    let eps = tol.eps_feas;
    let mut found = Vec::new();
    for j in 0..m {
        let p = ce.prices[j];
        if p < -eps {
            found.push(violation(NegativePrice, Price, None, Some(j), p));
        }
        let total: f64 = (0..n).map(|i| ce.fractions[i][j]).sum();
        if total > 1.0 + eps {
            found.push(violation(
                OverAllocated,
                Allocation,
                None,
                Some(j),
                total - 1.0,
            ));
        }
        if p > eps && total < 1.0 - eps {
            found.push(violation(
                NotFullyAllocated,
                Allocation,
                None,
                Some(j),
                1.0 - total,
            ));
        }
        for i in 0..n {
            let x = ce.fractions[i][j];
            if !(-eps..=1.0 + eps).contains(&x) {
                found.push(violation(
                    FractionOutOfRange,
                    Allocation,
                    Some(i),
                    Some(j),
                    x,
                ));
            }
        }
    }
    for i in 0..n {
        let spent = ce.bidder_spend(i);
        if spent > inst.budget(i) + eps {
            found.push(violation(
                OverBudget,
                Budget,
                Some(i),
                None,
                spent - inst.budget(i),
            ));
        }
        let got: f64 = (0..m)
            .map(|j| ce.fractions[i][j] * (inst.value(i, j) - ce.prices[j]))
            .sum();
        let best = demand_utility(inst, i, &ce.prices);
        if got < best - eps * best.abs().max(1.0) {
            let good = worst_purchase(inst, i, ce);
            found.push(violation(
                NotDemandOptimal,
                Demand,
                Some(i),
                good,
                best - got,
            ));
        }
    }
    Ok(Verdict::from_violations(found))
}

/// Good the bidder should have bought more of: the highest bang-per-buck good
/// (free goods first) not fully taken.
fn worst_purchase(inst: &PacingInstance, i: usize, ce: &CompetitiveOutcome) -> Option<usize> {
    let ratio = |j: usize| {
        let p = ce.prices[j];
        if p <= 0.0 {
            f64::INFINITY
        } else {
            inst.value(i, j) / p
        }
    };
    (0..inst.m())
        .filter(|&j| ce.fractions[i][j] < 1.0 && inst.value(i, j) > ce.prices[j])
        .max_by(|&a, &b| ratio(a).total_cmp(&ratio(b)))
}

/// Prices each good at its second-highest paced bid and keeps the allocation.
pub fn pe_to_ce(
    inst: &PacingInstance,
    out: &PacingOutcome,
    tol: &Tolerance,
) -> Result<CompetitiveOutcome> {
    let verdict = verify_equilibrium(inst, out, tol)?;
    if !verdict.is_accepted() {
        return Err(Error::NotEquilibrium(format!(
            "{} violations",
            verdict.violations.len()
        )));
    }
    let bids = inst.paced_bids(&out.alphas);
    let prices = (0..inst.m())
        .map(|j| {
            let mut col: Vec<f64> = bids.iter().map(|r| r[j]).collect();
            col.sort_by(|a, b| b.total_cmp(a));
            col.get(1).copied().unwrap_or(0.0)
        })
        .collect();
    Ok(CompetitiveOutcome {
        prices,
        fractions: out.fractions.clone(),
    })
}

/// A competitive equilibrium recast as a pacing equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct CeToPacing {
    /// The instance plus a price-setting bidder with unlimited budget.
    pub augmented: PacingInstance,
    pub outcome: PacingOutcome,
    /// Budget-exhausted bidders that bought nothing priced; their multiplier defaults to 1.
    pub defaulted: Vec<usize>,
}

/// Adds a price-setter valuing each good at its price and paces every
/// budget-exhausted bidder at its lowest bang-per-buck purchase.
pub fn ce_to_pacing(
    inst: &PacingInstance,
    ce: &CompetitiveOutcome,
    tol: &Tolerance,
) -> Result<CeToPacing> {
    let verdict = verify_competitive(inst, ce, tol)?;
    if !verdict.is_accepted() {
        return Err(Error::NotCompetitive(format!(
            "{} violations",
            verdict.violations.len()
        )));
    }
    let (n, m) = (inst.n(), inst.m());
    let mut alphas = Vec::with_capacity(n + 1);
    let mut defaulted = Vec::new();
    for i in 0..n {
        let exhausted =
            !inst.is_unlimited(i) && ce.bidder_spend(i) >= inst.budget(i) - tol.eps_feas;
        if !exhausted {
            alphas.push(1.0);
            continue;
        }
        let pace = (0..m)
            .filter(|&j| {
                ce.fractions[i][j] > tol.eps_feas && ce.prices[j] > 0.0 && inst.value(i, j) > 0.0
            })
            .map(|j| ce.prices[j] / inst.value(i, j))
            .fold(f64::NEG_INFINITY, f64::max);
        if pace.is_finite() {
            alphas.push(pace.min(1.0));
        } else {
            defaulted.push(i);
            alphas.push(1.0);
        }
    }
    alphas.push(1.0);

    let mut values = inst.values().to_vec();
    values.push(ce.prices.iter().map(|p| p.max(0.0)).collect());
    let mut budgets = inst.budgets().to_vec();
    budgets.push(f64::INFINITY);
    let augmented = PacingInstance::new(values, budgets)?;

    let mut fractions = ce.fractions.clone();
    fractions.push(vec![0.0; m]);
    let outcome = PacingOutcome::new(alphas, fractions, ce.prices.clone());
    Ok(CeToPacing {
        augmented,
        outcome,
        defaulted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_market_is_competitive() {
        let inst = PacingInstance::new(vec![vec![0.0, 0.0]; 2], vec![1.0, 1.0]).unwrap();
        let ce = CompetitiveOutcome {
            prices: vec![0.0, 0.0],
            fractions: vec![vec![0.0, 0.0]; 2],
        };
        assert!(verify_competitive(&inst, &ce, &Tolerance::default())
            .unwrap()
            .is_accepted());
    }

    #[test]
    fn single_bidder_round_trip() {
        let inst = PacingInstance::new(vec![vec![1.0]], vec![1.0]).unwrap();
        let pe = PacingOutcome::new(vec![1.0], vec![vec![1.0]], vec![0.0]);
        let ce = pe_to_ce(&inst, &pe, &Tolerance::default()).unwrap();
        assert_eq!(ce.prices, vec![0.0]);
        assert_eq!(ce.fractions, vec![vec![1.0]]);
    }

    #[test]
    fn zero_prices_add_a_silent_bidder() {
        let inst = PacingInstance::new(vec![vec![1.0, 2.0]], vec![1.0]).unwrap();
        let ce = CompetitiveOutcome {
            prices: vec![0.0, 0.0],
            fractions: vec![vec![1.0, 1.0]],
        };
        let back = ce_to_pacing(&inst, &ce, &Tolerance::default()).unwrap();
        assert_eq!(back.augmented.values()[1], vec![0.0, 0.0]);
        assert_eq!(back.outcome.alphas, vec![1.0, 1.0]);
        assert_eq!(back.outcome.fractions[0], vec![1.0, 1.0]);
        assert!(
            verify_equilibrium(&back.augmented, &back.outcome, &Tolerance::default())
                .unwrap()
                .is_accepted()
        );
    }

    #[test]
    fn overpriced_purchase_is_not_demand_optimal() {
        let inst = PacingInstance::new(vec![vec![1.0]], vec![10.0]).unwrap();
        let ce = CompetitiveOutcome {
            prices: vec![2.0],
            fractions: vec![vec![1.0]],
        };
        let v = verify_competitive(&inst, &ce, &Tolerance::default()).unwrap();
        assert!(v.fails(Condition::Demand));
    }

    #[test]
    fn positive_price_must_clear() {
        let inst = PacingInstance::new(vec![vec![1.0]], vec![10.0]).unwrap();
        let ce = CompetitiveOutcome {
            prices: vec![0.5],
            fractions: vec![vec![0.5]],
        };
        let v = verify_competitive(&inst, &ce, &Tolerance::default()).unwrap();
        assert!(!v.is_accepted());
    }
}
