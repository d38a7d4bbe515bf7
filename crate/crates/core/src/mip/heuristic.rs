//! Branching hints from an approximate equilibrium.
//!
//! Bisection sweeps on a smoothed auction drive the multipliers toward a
//! point where limited bidders spend about their budgets. The bid ranking at
//! that point suggests values for the winner, runner-up, win and binding
//! binaries.

use super::model::{Family, MilpModel};

/// Relative gap under which two bids count as tied in a hint.
const HINT_TIE: f64 = 1e-3;

/// Spend of bidder `i` in the second-price auction at fixed multipliers.
/// Bidders within `band · top` of the top bid share the good in proportion
/// to their margin over `top (1 − band)`; `band = 0` splits exact ties evenly.
fn spend_of(values: &[Vec<f64>], alphas: &[f64], band: f64, i: usize) -> f64 {
    let n = values.len();
    let mut spend = 0.0;
    for j in 0..values[i].len() {
        let mine = alphas[i] * values[i][j];
        if mine <= 0.0 {
            continue;
        }
        let other = (0..n)
            .filter(|&k| k != i)
            .map(|k| alphas[k] * values[k][j])
            .fold(0.0, f64::max);
        let top = mine.max(other);
        let floor = top * (1.0 - band.max(1e-12));
        let margin = |b: f64| {
            if band > 0.0 {
                (b - floor).max(0.0)
            } else if b >= floor {
                1.0
            } else {
                0.0
            }
        };
        let own = margin(mine);
        if own > 0.0 {
            let total: f64 = (0..n).map(|k| margin(alphas[k] * values[k][j])).sum();
            spend += own / total * other;
        }
    }
    spend
}

/// Gauss-Seidel sweeps on the banded auction: each bidder in turn takes the
/// largest multiplier whose spend fits its budget, found by bisection (own
/// spend grows with own multiplier). The band shrinks geometrically.
pub(crate) fn approximate_alphas(values: &[Vec<f64>], budgets: &[f64], sweeps: usize) -> Vec<f64> {
    let n = values.len();
    let mut alphas = vec![1.0; n];
    for t in 0..sweeps {
        let band = 0.05 * (1e-5f64 / 0.05).powf(t as f64 / sweeps.saturating_sub(1).max(1) as f64);
        for i in 0..n {
            alphas[i] = 1.0;
            if spend_of(values, &alphas, band, i) <= budgets[i] {
                continue;
            }
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..50 {
                alphas[i] = 0.5 * (lo + hi);
                if spend_of(values, &alphas, band, i) > budgets[i] {
                    hi = alphas[i];
                } else {
                    lo = alphas[i];
                }
            }
            alphas[i] = lo;
        }
    }
    alphas
}

/// Suggested value for each binary model variable, `None` for continuous ones.
pub(crate) fn binary_hints(model: &MilpModel, alphas: &[f64]) -> Vec<Option<f64>> {
    let (n, m) = (model.n, model.m);
    let values = &model.values;
    let mut top = vec![0usize; m];
    let mut runner = vec![0usize; m];
    let mut tied = vec![vec![false; m]; n];
    for j in 0..m {
        let bid = |i: usize| alphas[i] * values[i][j];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| bid(b).total_cmp(&bid(a)).then(a.cmp(&b)));
        top[j] = order[0];
        runner[j] = order[1];
        let h = bid(order[0]);
        for i in 0..n {
            tied[i][j] = h > 0.0 && values[i][j] > 0.0 && bid(i) >= h * (1.0 - HINT_TIE);
        }
        tied[top[j]][j] = true;
    }
    model
        .vars
        .iter()
        .map(|var| {
            let (i, j) = (var.bidder.unwrap_or(0), var.good.unwrap_or(0));
            let on = match var.family {
                Family::Win => tied[i][j],
                Family::Winner => top[j] == i,
                Family::Runner => runner[j] == i,
                Family::Binding => {
                    alphas[i] < 1.0 - HINT_TIE
                        || spend_of(values, alphas, 0.0, i) >= model.budgets[i] * (1.0 - HINT_TIE)
                }
                _ => return None,
            };
            Some(if on { 1.0 } else { 0.0 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_good_splits_budgets() {
        // Two bidders on one good: the poorer bidder should pace down to tie.
        let values = vec![vec![10.0], vec![8.0]];
        let alphas = approximate_alphas(&values, &[100.0, 100.0], 400);
        assert!(alphas[0] > 0.99 && alphas[1] > 0.99);
        let alphas = approximate_alphas(&values, &[1.0, 100.0], 400);
        assert!(alphas[0] < 0.9);
    }
}
