//! Smoothed pacing game: allocations and utilities that vary continuously
//! with the multipliers.
//!
//! A reserve bidder bids `2ε` on every good. Bidders within `ε` of the top
//! bid share the good in proportion to how far they clear `b* − ε`, and each
//! pays the highest competing bid minus `ε`. Every bidder also buys an
//! artificial good worth `2αε` at price `αε`, and pays a penalty rate `H`
//! on spend beyond its budget.

use serde::{Deserialize, Serialize};

use super::instance::PacingInstance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedGameParams {
    pub epsilon: f64,
    /// Over-budget penalty rate `H`.
    pub penalty: f64,
    /// Upper bound `M` on any bidder's total value, artificial good included.
    pub value_bound: f64,
}

impl SmoothedGameParams {
    pub fn new(epsilon: f64, penalty: f64, value_bound: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            penalty,
            value_bound,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `M` = largest row sum plus `2ε` and `H = 2M/ε + 1`.
    pub fn for_instance(inst: &PacingInstance, epsilon: f64) -> Result<Self> {
        let m = inst
            .values()
            .iter()
            .map(|r| r.iter().sum::<f64>())
            .fold(0.0, f64::max)
            + 2.0 * epsilon;
        Self::new(epsilon, 2.0 * m / epsilon + 1.0, m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.value_bound > 0.0) {
            return Err(Error::InvalidParameter(
                "epsilon and value bound must be positive".into(),
            ));
        }
        if !(self.penalty > self.value_bound / self.epsilon) {
            return Err(Error::InvalidParameter(
                "penalty must exceed value_bound / epsilon".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedOutcome {
    pub fractions: Vec<Vec<f64>>,
    pub spends: Vec<Vec<f64>>,
    /// Utility of each bidder. For an unlimited budget the constant `B_i`
    /// term is dropped.
    pub utilities: Vec<f64>,
    pub over_budget: Vec<bool>,
}

/// Evaluates the smoothed game at the given multipliers.
pub fn smoothed_outcome(
    inst: &PacingInstance,
    alphas: &[f64],
    params: &SmoothedGameParams,
) -> Result<SmoothedOutcome> {
    params.validate()?;
    let (n, m) = (inst.n(), inst.m());
    if alphas.len() != n {
        return Err(Error::Dimension(format!(
            "{} multipliers for {n} bidders",
            alphas.len()
        )));
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidParameter(format!(
            "multiplier {a} outside [0, 1]"
        )));
    }
    let eps = params.epsilon;
    let reserve = 2.0 * eps;
    let bids = inst.paced_bids(alphas);
    let mut fractions = vec![vec![0.0; m]; n];
    let mut spends = vec![vec![0.0; m]; n];
    for j in 0..m {
        let top = (0..n).map(|i| bids[i][j]).fold(reserve, f64::max);
        let floor = top - eps;
        let margin = |b: f64| if b >= floor { b - floor } else { 0.0 };
        let total: f64 = (0..n).map(|i| margin(bids[i][j])).sum::<f64>() + margin(reserve);
        for i in 0..n {
            let x = margin(bids[i][j]) / total;
            if x == 0.0 {
                continue;
            }
            let other = (0..n)
                .filter(|&k| k != i)
                .map(|k| bids[k][j])
                .fold(reserve, f64::max);
            fractions[i][j] = x;
            spends[i][j] = x * (other - eps);
        }
    }
    let mut utilities = Vec::with_capacity(n);
    let mut over_budget = Vec::with_capacity(n);
    for i in 0..n {
        let a = alphas[i];
        let paid = a * eps + spends[i].iter().sum::<f64>();
        let value = 2.0 * a * eps
            + (0..m)
                .map(|j| fractions[i][j] * inst.value(i, j))
                .sum::<f64>();
        let budget = inst.budget(i);
        let (u, over) = if budget.is_infinite() {
            (value - paid, false)
        } else if paid <= budget {
            (budget - paid + value, false)
        } else {
            (params.penalty * (budget - paid) + value, true)
        };
        utilities.push(u);
        over_budget.push(over);
    }
    Ok(SmoothedOutcome {
        fractions,
        spends,
        utilities,
        over_budget,
    })
}
