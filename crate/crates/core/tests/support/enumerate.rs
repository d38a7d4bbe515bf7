//! Exhaustive revenue oracle built from the equilibrium conditions.
//!
//! A pattern fixes, for every valued good, the set of top bidders sharing it
//! and (for a single top bidder) the bidder whose bid sets the price, plus
//! the set of budget-binding bidders. Given a pattern the conditions are
//! linear in the multipliers and the per-edge spends, so the best revenue is
//! the best LP value over all patterns.

use super::textbook::{minimize, Lp, LpResult, Sense};
use pacing_core::PacingInstance;

#[derive(Debug, Clone)]
struct Pattern {
    /// Top bidders of each good, empty for unvalued goods.
    top: Vec<Vec<usize>>,
    /// Price setter of each good, `None` when the price is zero by construction.
    setter: Vec<Option<usize>>,
    binding: Vec<bool>,
}

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (1..1u32 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &i)| i)
                .collect()
        })
        .collect()
}

/// Per-good choices of (top set, price setter).
fn good_choices(inst: &PacingInstance, j: usize) -> Vec<(Vec<usize>, Option<usize>)> {
    let n = inst.n();
    let valuers: Vec<usize> = (0..n).filter(|&i| inst.value(i, j) > 0.0).collect();
    if valuers.is_empty() {
        return vec![(vec![], None)];
    }
    let mut out = Vec::new();
    for top in subsets(&valuers) {
        if top.len() >= 2 {
            out.push((top.clone(), Some(top[0])));
        } else {
            let others: Vec<usize> = (0..n).filter(|&k| k != top[0]).collect();
            if others.is_empty() {
                out.push((top.clone(), None));
            }
            for r in others {
                out.push((top.clone(), Some(r)));
            }
        }
    }
    out
}

/// LP of one pattern. Columns: `α_i` at `i`, then one spend per (top bidder, good).
fn pattern_lp(inst: &PacingInstance, pat: &Pattern, maximize: bool) -> Lp {
    let (n, m) = (inst.n(), inst.m());
    let mut spend_col = vec![vec![None; m]; n];
    let mut cols = n;
    for j in 0..m {
        for &i in &pat.top[j] {
            spend_col[i][j] = Some(cols);
            cols += 1;
        }
    }
    let mut lp = Lp::new(cols);
    let v = |i: usize, j: usize| inst.value(i, j);
    for i in 0..n {
        lp.row(&[(i, 1.0)], Sense::Le, 1.0);
        if !pat.binding[i] {
            lp.row(&[(i, 1.0)], Sense::Ge, 1.0);
        }
    }
    for j in 0..m {
        let top = &pat.top[j];
        let Some(&lead) = top.first() else { continue };
        for w in top.windows(2) {
            lp.row(&[(w[0], v(w[0], j)), (w[1], -v(w[1], j))], Sense::Eq, 0.0);
        }
        for k in (0..n).filter(|k| !top.contains(k)) {
            lp.row(&[(k, v(k, j)), (lead, -v(lead, j))], Sense::Le, 0.0);
            if let Some(r) = pat.setter[j] {
                if top.len() == 1 && k != r {
                    lp.row(&[(k, v(k, j)), (r, -v(r, j))], Sense::Le, 0.0);
                }
            }
        }
        let mut clearing: Vec<(usize, f64)> = top
            .iter()
            .map(|&i| (spend_col[i][j].unwrap(), 1.0))
            .collect();
        if let Some(r) = pat.setter[j] {
            clearing.push((r, -v(r, j)));
            lp.cost[r] += if maximize { -v(r, j) } else { v(r, j) };
        }
        lp.row(&clearing, Sense::Eq, 0.0);
    }
    for i in (0..n).filter(|&i| !inst.is_unlimited(i)) {
        let terms: Vec<(usize, f64)> = (0..m)
            .filter_map(|j| spend_col[i][j].map(|c| (c, 1.0)))
            .collect();
        lp.row(&terms, Sense::Le, inst.budget(i));
        if pat.binding[i] {
            lp.row(&terms, Sense::Ge, inst.budget(i));
        }
    }
    lp
}

/// Highest (or lowest) equilibrium revenue, `None` if no pattern is feasible.
pub fn extreme_revenue(inst: &PacingInstance, maximize: bool) -> Option<f64> {
    let (n, m) = (inst.n(), inst.m());
    let per_good: Vec<_> = (0..m).map(|j| good_choices(inst, j)).collect();
    let limited: Vec<usize> = (0..n).filter(|&i| !inst.is_unlimited(i)).collect();
    let mut best: Option<f64> = None;
    let mut idx = vec![0usize; m];
    loop {
        let top: Vec<Vec<usize>> = (0..m).map(|j| per_good[j][idx[j]].0.clone()).collect();
        let setter: Vec<Option<usize>> = (0..m).map(|j| per_good[j][idx[j]].1).collect();
        for mask in 0..1u32 << limited.len() {
            let mut binding = vec![false; n];
            for (b, &i) in limited.iter().enumerate() {
                binding[i] = mask >> b & 1 == 1;
            }
            let pat = Pattern {
                top: top.clone(),
                setter: setter.clone(),
                binding,
            };
            if let LpResult::Optimal { value, .. } = minimize(&pattern_lp(inst, &pat, maximize)) {
                let revenue = if maximize { -value } else { value };
                best = Some(match best {
                    None => revenue,
                    Some(b) if maximize => b.max(revenue),
                    Some(b) => b.min(revenue),
                });
            }
        }
        // Odometer over per-good choices.
        let mut k = 0;
        loop {
            if k == m {
                return best;
            }
            idx[k] += 1;
            if idx[k] < per_good[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
