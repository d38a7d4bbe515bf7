//! Conversions between model assignments and pacing outcomes.

use super::model::MilpModel;
use crate::error::{Error, Result};
use crate::market::{verify_equilibrium, PacingOutcome, Tolerance};

/// Largest row or bound violation, each scaled by `1 + max |coefficient or bound|`.
pub fn scaled_violation(model: &MilpModel, x: &[f64]) -> (usize, f64) {
    let mut worst = (usize::MAX, 0.0);
    for (k, c) in model.constraints.iter().enumerate() {
        let scale = 1.0 + c.terms.iter().map(|t| t.1.abs()).fold(0.0, f64::max);
        let v = c.violation(x) / scale;
        if v > worst.1 {
            worst = (k, v);
        }
    }
    for (k, var) in model.vars.iter().enumerate() {
        let v = (var.lo - x[k]).max(x[k] - var.hi).max(0.0) / (1.0 + var.hi.abs());
        if v > worst.1 {
            worst = (model.constraints.len() + k, v);
        }
    }
    worst
}

/// Turns a model assignment into an outcome of the original market.
///
/// Fractions are `s_ij / Σ_i s_ij` over edges with `d_ij = 1` on goods with
/// positive price. A good with price at most `feas_tol` goes whole to its
/// designated winner when that bidder values it, otherwise to the
/// lowest-index top bidder that does.
/// Padding bidders are dropped.
pub fn decode(model: &MilpModel, x: &[f64], feas_tol: f64) -> Result<PacingOutcome> {
    if x.len() != model.num_vars() {
        return Err(Error::Dimension(format!(
            "{} values for {} variables",
            x.len(),
            model.num_vars()
        )));
    }
    let (worst_row, worst) = scaled_violation(model, x);
    if worst > feas_tol.max(1e-6) {
        let constraint = if worst_row < model.constraints.len() {
            format!(
                "family {} row {worst_row}",
                model.constraints[worst_row].family
            )
        } else {
            model.vars[worst_row - model.constraints.len()].name()
        };
        return Err(Error::Residual {
            constraint,
            residual: worst,
        });
    }
    let n = model.instance.n();
    let m = model.m;
    let alphas: Vec<f64> = (0..n).map(|i| x[model.alpha(i)].clamp(0.0, 1.0)).collect();
    let mut fractions = vec![vec![0.0; m]; n];
    let mut prices = vec![0.0; m];
    for j in 0..m {
        // Spend on edges with d = 0 is LP round-off.
        let spend = |i: usize| {
            if x[model.d(i, j)] >= 0.5 {
                x[model.s(i, j)].max(0.0)
            } else {
                0.0
            }
        };
        let spent: f64 = (0..n).map(spend).sum();
        let price = x[model.p(j)].max(0.0);
        if price > feas_tol && spent > 0.0 {
            for i in 0..n {
                fractions[i][j] = spend(i) / spent;
            }
            prices[j] = price;
            continue;
        }
        prices[j] = price;
        let winner = (0..model.n).max_by(|&a, &b| x[model.w(a, j)].total_cmp(&x[model.w(b, j)]));
        let holder = match winner {
            Some(w) if w < n && model.values[w][j] > 0.0 => Some(w),
            _ => {
                let top = (0..n)
                    .map(|i| alphas[i] * model.values[i][j])
                    .fold(0.0, f64::max);
                (0..n).find(|&i| {
                    model.values[i][j] > 0.0 && alphas[i] * model.values[i][j] >= top - feas_tol
                })
            }
        };
        if let Some(i) = holder {
            fractions[i][j] = 1.0;
        }
    }
    Ok(PacingOutcome::new(alphas, fractions, prices))
}

/// Builds the model assignment corresponding to a verified equilibrium.
///
/// The designated winner is the lowest-index bidder receiving part of the
/// good (a top bidder if nobody does), and the price setter is the
/// lowest-index other bidder whose bid equals the price.
pub fn encode_outcome(model: &MilpModel, out: &PacingOutcome, tol: &Tolerance) -> Result<Vec<f64>> {
    let inst = &model.instance;
    let verdict = verify_equilibrium(inst, out, tol)?;
    if !verdict.is_accepted() {
        return Err(Error::NotEquilibrium(format!(
            "{} violations",
            verdict.violations.len()
        )));
    }
    let eps = tol.eps_feas;
    let (n, m) = (model.n, model.m);
    let real = inst.n();
    let alpha = |i: usize| if i < real { out.alphas[i] } else { 1.0 };
    let frac = |i: usize, j: usize| if i < real { out.fractions[i][j] } else { 0.0 };
    let bid = |i: usize, j: usize| alpha(i) * model.values[i][j];

    let mut x = vec![0.0; model.num_vars()];
    for i in 0..n {
        x[model.alpha(i)] = alpha(i);
    }
    for j in 0..m {
        let price = out.prices[j].max(0.0);
        x[model.p(j)] = price;
        let top = (0..n).map(|i| bid(i, j)).fold(0.0, f64::max);
        x[model.h(j)] = top;
        for i in 0..n {
            x[model.s(i, j)] = price * frac(i, j);
        }
        let winner = (0..n)
            .find(|&i| frac(i, j) > eps)
            .or_else(|| {
                (0..n).find(|&i| {
                    bid(i, j) >= top - eps && (model.vbar[j] <= 0.0 || model.values[i][j] > 0.0)
                })
            })
            .unwrap_or(0);
        let runner = (0..n)
            .find(|&i| i != winner && (bid(i, j) - price).abs() <= eps)
            .or_else(|| {
                (0..n).filter(|&i| i != winner).min_by(|&a, &b| {
                    (bid(a, j) - price)
                        .abs()
                        .total_cmp(&(bid(b, j) - price).abs())
                })
            })
            .expect("models have at least two bidders");
        x[model.w(winner, j)] = 1.0;
        x[model.r(runner, j)] = 1.0;
        for i in 0..n {
            if frac(i, j) > eps || i == winner {
                x[model.d(i, j)] = 1.0;
            }
        }
    }
    for i in 0..n {
        let spend: f64 = (0..m).map(|j| x[model.s(i, j)]).sum();
        let limited = i >= real || !inst.is_unlimited(i);
        if limited && spend >= model.budgets[i] - eps {
            x[model.y(i)] = 1.0;
        }
    }
    Ok(x)
}
