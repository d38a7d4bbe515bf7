//! Budget calibration for compressed instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::PacingInstance;
use crate::mip::{solve_instance, Objective, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub instance: PacingInstance,
    /// Factor applied to every finite budget.
    pub scalar: f64,
    /// Bidders with `α < 1` in the paced-welfare-maximizing equilibrium.
    pub constrained: usize,
    /// Equilibria solved.
    pub solves: usize,
}

const PACED: f64 = 1e-6;
const MAX_SOLVES: usize = 60;

fn constrained_count(inst: &PacingInstance, solver: &SolverConfig) -> Result<usize> {
    let res = solve_instance(inst, Objective::MaxPacedWelfare, solver)?;
    match res.outcome {
        Some(out) if res.verified => Ok(out.alphas.iter().filter(|&&a| a < 1.0 - PACED).count()),
        _ => Err(Error::Solver(format!(
            "no verified equilibrium ({:?})",
            res.status
        ))),
    }
}

/// Scales all budgets by one factor until the share of paced bidders in the
/// paced-welfare-maximizing equilibrium is within one bidder of `target`.
///
/// The factor is bisected geometrically between one that leaves every
/// bidder able to afford all its values and one a thousand times smaller
/// than the current budgets. If the target cannot be reached, the closest
/// count found is returned.
pub fn calibrate_budgets(
    small: &PacingInstance,
    target: f64,
    solver: &SolverConfig,
) -> Result<Calibration> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::InvalidParameter(format!(
            "target fraction {target} outside [0, 1]"
        )));
    }
    let n = small.n();
    let goal = target * n as f64;
    let within = |c: usize| (c as f64 - goal).abs() <= 1.0;
    let mut solves = 1;
    let at_one = constrained_count(small, solver)?;
    if within(at_one) {
        return Ok(Calibration {
            instance: small.clone(),
            scalar: 1.0,
            constrained: at_one,
            solves,
        });
    }
    // Budgets at least the bidder's total value never bind.
    let unbinding = (0..n)
        .filter(|&i| !small.is_unlimited(i))
        .map(|i| small.values()[i].iter().sum::<f64>() / small.budget(i))
        .fold(1.0, f64::max)
        * 1.01;
    let (mut lo, mut hi) = if (at_one as f64) > goal {
        (1.0, unbinding)
    } else {
        (1e-3, 1.0)
    };
    let mut best = (at_one, 1.0);
    while solves < MAX_SOLVES && hi / lo > 1.0 + 1e-9 {
        let mid = (lo * hi).sqrt();
        let count = constrained_count(&small.scale_budgets(mid)?, solver)?;
        solves += 1;
        if (count as f64 - goal).abs() < (best.0 as f64 - goal).abs() {
            best = (count, mid);
        }
        if within(count) {
            break;
        }
        // More budget, fewer paced bidders.
        if count as f64 > goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (constrained, scalar) = best;
    Ok(Calibration {
        instance: small.scale_budgets(scalar)?,
        scalar,
        constrained,
        solves,
    })
}
