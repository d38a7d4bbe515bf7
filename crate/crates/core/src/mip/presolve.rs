//! Bound propagation and removal of fixed columns.

use super::model::MilpModel;
use crate::lp::LpProblem;

/// Sparse row with bounds, indexed over some column space.
#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub terms: Vec<(usize, f64)>,
    pub lo: f64,
    pub hi: f64,
}

const INT_EPS: f64 = 1e-9;
/// Columns whose range is at most this wide are treated as fixed.
const FIX_WIDTH: f64 = 1e-8;

/// Tightens bounds implied by row activities. Integer columns are rounded.
/// When `continuous` is false only integer columns are tightened.
/// Returns false if some row cannot be satisfied.
pub(crate) fn propagate(
    rows: &[Row],
    lo: &mut [f64],
    hi: &mut [f64],
    is_int: &[bool],
    continuous: bool,
    passes: usize,
) -> bool {
    for _ in 0..passes {
        let mut changed = false;
        for row in rows {
            let (mut amin, mut amax) = (0.0, 0.0);
            for &(k, a) in &row.terms {
                if a > 0.0 {
                    amin += a * lo[k];
                    amax += a * hi[k];
                } else {
                    amin += a * hi[k];
                    amax += a * lo[k];
                }
            }
            let slack = 1e-9 * (1.0 + row.lo.abs().min(row.hi.abs()).min(1e6));
            if amin > row.hi + slack || amax < row.lo - slack {
                return false;
            }
            for &(k, a) in &row.terms {
                if hi[k] - lo[k] <= FIX_WIDTH || (!continuous && !is_int[k]) {
                    continue;
                }
                let (cmin, cmax) = if a > 0.0 {
                    (a * lo[k], a * hi[k])
                } else {
                    (a * hi[k], a * lo[k])
                };
                let rest_min = amin - cmin;
                let rest_max = amax - cmax;
                // a x_k <= row.hi - rest_min and a x_k >= row.lo - rest_max.
                let (mut new_lo, mut new_hi) = (lo[k], hi[k]);
                if row.hi.is_finite() {
                    let lim = (row.hi - rest_min) / a;
                    if a > 0.0 {
                        new_hi = new_hi.min(lim);
                    } else {
                        new_lo = new_lo.max(lim);
                    }
                }
                if row.lo.is_finite() {
                    let lim = (row.lo - rest_max) / a;
                    if a > 0.0 {
                        new_lo = new_lo.max(lim);
                    } else {
                        new_hi = new_hi.min(lim);
                    }
                }
                if is_int[k] {
                    new_lo = (new_lo - INT_EPS).ceil();
                    new_hi = (new_hi + INT_EPS).floor();
                } else {
                    // Keep a margin so round-off never cuts off a feasible point.
                    new_lo -= 1e-9 * (1.0 + new_lo.abs());
                    new_hi += 1e-9 * (1.0 + new_hi.abs());
                }
                if new_lo > new_hi + 1e-7 * (1.0 + new_hi.abs()) {
                    return false;
                }
                let tighter_lo =
                    new_lo > lo[k] + 1e-7 * (1.0 + lo[k].abs()) || (is_int[k] && new_lo > lo[k]);
                let tighter_hi =
                    new_hi < hi[k] - 1e-7 * (1.0 + hi[k].abs()) || (is_int[k] && new_hi < hi[k]);
                if tighter_lo {
                    lo[k] = new_lo.min(hi[k]);
                    changed = true;
                }
                if tighter_hi {
                    hi[k] = new_hi.max(lo[k]);
                    changed = true;
                }
                if tighter_lo || tighter_hi {
                    let (c2min, c2max) = if a > 0.0 {
                        (a * lo[k], a * hi[k])
                    } else {
                        (a * hi[k], a * lo[k])
                    };
                    amin += c2min - cmin;
                    amax += c2max - cmax;
                }
            }
        }
        if !changed {
            break;
        }
    }
    true
}

/// Value a nearly fixed column is pinned to: 0 or 1 when in range, else the midpoint.
fn pin(lo: f64, hi: f64) -> f64 {
    [0.0, 1.0]
        .into_iter()
        .find(|v| (lo..=hi).contains(v))
        .unwrap_or(0.5 * (lo + hi))
}

/// The model with fixed columns substituted out and redundant rows dropped.
#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    /// Minimization form.
    pub lp: LpProblem,
    /// Model variable behind each reduced column.
    pub cols: Vec<usize>,
    /// Pinned value of each model variable removed by presolve.
    pub fixed: Vec<Option<f64>>,
    pub is_int: Vec<bool>,
    /// Rows over reduced columns, for node propagation.
    pub rows: Vec<Row>,
    /// Objective constant from fixed columns, minimization sense.
    pub offset: f64,
}

impl Reduced {
    /// Expands a reduced point to a full model assignment.
    pub fn expand(&self, xr: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = self.fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        for (c, &k) in self.cols.iter().enumerate() {
            x[k] = xr[c];
        }
        x
    }
}

/// Propagates the model bounds and removes fixed columns. `None` means the
/// model is infeasible.
pub(crate) fn presolve(model: &MilpModel) -> Option<Reduced> {
    let nv = model.num_vars();
    let mut lo: Vec<f64> = model.vars.iter().map(|v| v.lo).collect();
    let mut hi: Vec<f64> = model.vars.iter().map(|v| v.hi).collect();
    let is_int: Vec<bool> = model.vars.iter().map(|v| v.family.is_binary()).collect();
    let rows: Vec<Row> = model
        .constraints
        .iter()
        .map(|c| Row {
            terms: c.terms.clone(),
            lo: c.lo,
            hi: c.hi,
        })
        .collect();
    if !propagate(&rows, &mut lo, &mut hi, &is_int, true, 20) {
        return None;
    }
    let sign = if model.objective.maximize() {
        -1.0
    } else {
        1.0
    };
    let mut fixed = vec![None; nv];
    let mut map = vec![usize::MAX; nv];
    let mut lp = LpProblem::default();
    let mut cols = Vec::new();
    let mut offset = 0.0;
    let mut red_int = Vec::new();
    for k in 0..nv {
        if hi[k] - lo[k] <= FIX_WIDTH {
            let v = pin(lo[k], hi[k]);
            fixed[k] = Some(v);
            offset += sign * model.cost[k] * v;
        } else {
            map[k] = lp.add_col(sign * model.cost[k], lo[k], hi[k]);
            cols.push(k);
            red_int.push(is_int[k]);
        }
    }
    let mut red_rows = Vec::new();
    for row in &rows {
        let mut constant = 0.0;
        let mut terms = Vec::new();
        for &(k, a) in &row.terms {
            match fixed[k] {
                Some(v) => constant += a * v,
                None => terms.push((map[k], a)),
            }
        }
        let (rlo, rhi) = (row.lo - constant, row.hi - constant);
        let tol = 1e-7 * (1.0 + rlo.abs().min(rhi.abs()).min(1e6));
        if terms.is_empty() {
            if rlo > tol || rhi < -tol {
                return None;
            }
            continue;
        }
        let (mut amin, mut amax) = (0.0, 0.0);
        for &(c, a) in &terms {
            let (l, h) = (lp.col_lo[c], lp.col_hi[c]);
            if a > 0.0 {
                amin += a * l;
                amax += a * h;
            } else {
                amin += a * h;
                amax += a * l;
            }
        }
        if amin >= rlo && amax <= rhi {
            continue;
        }
        lp.add_row(terms.clone(), rlo, rhi);
        red_rows.push(Row {
            terms,
            lo: rlo,
            hi: rhi,
        });
    }
    Some(Reduced {
        lp,
        cols,
        fixed,
        is_int: red_int,
        rows: red_rows,
        offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagation_fixes_binaries() {
        // x0 + x1 = 1 with x0 >= 1 forces x1 = 0.
        let rows = vec![Row {
            terms: vec![(0, 1.0), (1, 1.0)],
            lo: 1.0,
            hi: 1.0,
        }];
        let (mut lo, mut hi) = (vec![1.0, 0.0], vec![1.0, 1.0]);
        assert!(propagate(&rows, &mut lo, &mut hi, &[true, true], true, 5));
        assert_eq!(hi[1], 0.0);
    }

    #[test]
    fn propagation_detects_conflict() {
        let rows = vec![Row {
            terms: vec![(0, 1.0), (1, 1.0)],
            lo: f64::NEG_INFINITY,
            hi: 1.0,
        }];
        let (mut lo, mut hi) = (vec![1.0, 1.0], vec![1.0, 1.0]);
        assert!(!propagate(&rows, &mut lo, &mut hi, &[true, true], true, 5));
    }

    #[test]
    fn continuous_bounds_keep_a_margin() {
        // s - 2 d <= 0 with d <= 0.5 gives s <= 1, slightly relaxed.
        let rows = vec![Row {
            terms: vec![(0, 1.0), (1, -2.0)],
            lo: f64::NEG_INFINITY,
            hi: 0.0,
        }];
        let (mut lo, mut hi) = (vec![0.0, 0.0], vec![10.0, 0.5]);
        assert!(propagate(&rows, &mut lo, &mut hi, &[false, false], true, 5));
        assert!(hi[0] >= 1.0 && hi[0] < 1.0 + 1e-8);
    }
}
