use serde::{Deserialize, Serialize};

use super::instance::PacingInstance;
use super::outcome::{PacingOutcome, Tolerance};
use crate::error::Result;

/// Which equilibrium condition a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Allocation feasibility and highest-bid winners.
    Allocation,
    /// Second-price payments.
    Price,
    /// Budget feasibility and no unnecessary pacing.
    Budget,
    /// Competitive-equilibrium demand conditions.
    Demand,
}

/// Machine-readable reason for rejecting an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCode {
    AlphaOutOfRange,
    FractionOutOfRange,
    NegativePrice,
    OverAllocated,
    NotFullyAllocated,
    NotHighestBid,
    WrongPrice,
    OverBudget,
    PacedWhileUnderspending,
    NotDemandOptimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub condition: Condition,
    pub bidder: Option<usize>,
    pub good: Option<usize>,
    /// Size of the violation in the units of the checked quantity.
    pub amount: f64,
}

/// Result of a verifier: accepted iff there are no violations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub(crate) fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            accepted: violations.is_empty(),
            violations,
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.accepted
    }

    /// True if some violation belongs to `cond`.
    pub fn fails(&self, cond: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == cond)
    }
}

pub(crate) fn violation(
    code: ViolationCode,
    condition: Condition,
    bidder: Option<usize>,
    good: Option<usize>,
    amount: f64,
) -> Violation {
    Violation {
        code,
        condition,
        bidder,
        good,
        amount,
    }
}

/// Checks the three pacing-equilibrium conditions within `tol`.
///
/// * allocation: per-good fractions sum to at most one, to exactly one when
///   somebody values the good, and only (tied-)highest paced bidders win;
/// * price: a winner pays the highest paced bid among the other bidders;
/// * budget: nobody overspends, and a bidder who underspends is unpaced.
pub fn verify_equilibrium(
    inst: &PacingInstance,
    out: &PacingOutcome,
    tol: &Tolerance,
) -> Result<Verdict> {
    use Condition::*;
    use ViolationCode::*;
    out.check_shape(inst)?;
    let (n, m) = (inst.n(), inst.m());
    let eps = tol.eps_feas;
    let mut found = Vec::new();

    for (i, &a) in out.alphas.iter().enumerate() {
        if !(-eps..=1.0 + eps).contains(&a) {
            found.push(violation(AlphaOutOfRange, Allocation, Some(i), None, a));
        }
    }
    let bids = inst.paced_bids(&out.alphas);

    for j in 0..m {
        let p = out.prices[j];
        if p < -eps {
            found.push(violation(NegativePrice, Price, None, Some(j), p));
        }
        let total: f64 = (0..n).map(|i| out.fractions[i][j]).sum();
        if total > 1.0 + eps {
            found.push(violation(
                OverAllocated,
                Allocation,
                None,
                Some(j),
                total - 1.0,
            ));
        }
        if inst.max_value(j) > 0.0 && total < 1.0 - eps {
            found.push(violation(
                NotFullyAllocated,
                Allocation,
                None,
                Some(j),
                1.0 - total,
            ));
        }
        let top = (0..n).map(|i| bids[i][j]).fold(0.0, f64::max);
        for i in 0..n {
            let x = out.fractions[i][j];
            if !(-eps..=1.0 + eps).contains(&x) {
                found.push(violation(
                    FractionOutOfRange,
                    Allocation,
                    Some(i),
                    Some(j),
                    x,
                ));
            }
            if x <= eps {
                continue;
            }
            if bids[i][j] < top - tol.eps_tie {
                found.push(violation(
                    NotHighestBid,
                    Allocation,
                    Some(i),
                    Some(j),
                    top - bids[i][j],
                ));
            }
            let other = (0..n)
                .filter(|&k| k != i)
                .map(|k| bids[k][j])
                .fold(0.0, f64::max);
            if (p - other).abs() > eps {
                found.push(violation(WrongPrice, Price, Some(i), Some(j), p - other));
            }
        }
    }

    for i in 0..n {
        let spent = out.bidder_spend(i);
        let budget = inst.budget(i);
        if spent > budget + eps {
            found.push(violation(OverBudget, Budget, Some(i), None, spent - budget));
        }
        if spent < budget - eps && out.alphas[i] < 1.0 - eps {
            found.push(violation(
                PacedWhileUnderspending,
                Budget,
                Some(i),
                None,
                1.0 - out.alphas[i],
            ));
        }
    }
    Ok(Verdict::from_violations(found))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> PacingInstance {
        PacingInstance::new(vec![vec![1.0]], vec![1.0]).unwrap()
    }

    #[test]
    fn lone_bidder_pays_nothing() {
        let out = PacingOutcome::new(vec![1.0], vec![vec![1.0]], vec![0.0]);
        assert!(verify_equilibrium(&single(), &out, &Tolerance::default())
            .unwrap()
            .is_accepted());
    }

    #[test]
    fn underspending_paced_bidder_is_rejected() {
        let out = PacingOutcome::new(vec![0.5], vec![vec![1.0]], vec![0.0]);
        let v = verify_equilibrium(&single(), &out, &Tolerance::default()).unwrap();
        assert!(!v.is_accepted());
        assert!(v.fails(Condition::Budget));
        assert_eq!(v.violations[0].code, ViolationCode::PacedWhileUnderspending);
    }

    #[test]
    fn unvalued_good_may_stay_unallocated() {
        let inst = PacingInstance::new(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        let out = PacingOutcome::new(vec![1.0], vec![vec![1.0, 0.0]], vec![0.0, 0.0]);
        assert!(verify_equilibrium(&inst, &out, &Tolerance::default())
            .unwrap()
            .is_accepted());
    }

    #[test]
    fn nan_is_an_error() {
        let out = PacingOutcome::new(vec![f64::NAN], vec![vec![1.0]], vec![0.0]);
        assert!(verify_equilibrium(&single(), &out, &Tolerance::default()).is_err());
    }

    #[test]
    fn verdict_serializes_codes() {
        let out = PacingOutcome::new(vec![0.5], vec![vec![1.0]], vec![0.0]);
        let v = verify_equilibrium(&single(), &out, &Tolerance::default()).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"paced_while_underspending\""));
        assert!(json.contains("\"budget\""));
    }
}
