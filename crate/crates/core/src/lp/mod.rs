//! Dense bounded-variable simplex.
//!
//! Problems are `min cᵀx` subject to `row_lo <= A x <= row_hi` and
//! `col_lo <= x <= col_hi`. Each row gets a logical variable `r_k = A_k x`
//! carrying the row bounds, so the working system is `[A | −I] z = 0` with
//! every variable boxed. Row bounds are intersected with the activity range
//! implied by the column bounds, so logicals are boxed too.
//!
//! The dual simplex starts from the all-logical basis with every structural
//! at the bound its cost prefers, which is dual feasible because every
//! variable is boxed. After bound changes the previous optimal basis stays
//! dual feasible, so branch-and-bound nodes re-optimize with a few dual
//! pivots. A bounded primal simplex then removes any dual infeasibility
//! left by round-off. Both use Harris ratio tests and switch to Bland's
//! smallest-index rule after a run of degenerate pivots.
//! An attempt that loses accuracy restarts from the logical basis and
//! refactors more often.

use serde::{Deserialize, Serialize};

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const OPT_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-7;
const DROP_TOL: f64 = 1e-13;
/// Stand-in for an infinite column bound.
const BIG: f64 = 1e9;
const DEGENERATE_RUN: usize = 50;
const REFACTOR_EVERY: usize = 400;
/// Refactor interval after a numerically failed attempt.
const REFACTOR_CAREFUL: usize = 25;

/// A linear program in row-bounded form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub cost: Vec<f64>,
    pub col_lo: Vec<f64>,
    pub col_hi: Vec<f64>,
    /// Sparse rows as `(column, coefficient)` pairs.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub row_lo: Vec<f64>,
    pub row_hi: Vec<f64>,
}

impl LpProblem {
    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_col(&mut self, cost: f64, lo: f64, hi: f64) -> usize {
        self.cost.push(cost);
        self.col_lo.push(lo);
        self.col_hi.push(hi);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, lo: f64, hi: f64) -> usize {
        self.rows.push(terms);
        self.row_lo.push(lo);
        self.row_hi.push(hi);
        self.rows.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Simplex state: the full tableau `B⁻¹[A | −I]` plus values and reduced costs.
#[derive(Debug, Clone)]
pub struct Simplex {
    nr: usize,
    nc: usize,
    nt: usize,
    /// Original rows, kept for refactoring.
    rows: Vec<Vec<(usize, f64)>>,
    tab: Vec<f64>,
    head: Vec<usize>,
    /// Row of each basic variable, `usize::MAX` when nonbasic.
    pos: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    at_hi: Vec<bool>,
    iterations: usize,
    since_refactor: usize,
    refactor_every: usize,
    infeasible_bounds: bool,
    /// Structural columns whose infinite bounds were replaced by `BIG`.
    capped: Vec<usize>,
}

impl Simplex {
    pub fn new(p: &LpProblem) -> Self {
        let nr = p.num_rows();
        let nc = p.num_cols();
        let nt = nc + nr;
        let mut lo = Vec::with_capacity(nt);
        let mut hi = Vec::with_capacity(nt);
        let mut infeasible_bounds = false;
        let mut capped = Vec::new();
        for j in 0..nc {
            let l = p.col_lo[j].max(-BIG);
            let h = p.col_hi[j].min(BIG);
            if p.col_lo[j] < -BIG || p.col_hi[j] > BIG {
                capped.push(j);
            }
            infeasible_bounds |= l > h + FEAS_TOL;
            lo.push(l);
            hi.push(h);
        }
        for k in 0..nr {
            let (mut amin, mut amax) = (0.0, 0.0);
            for &(j, a) in &p.rows[k] {
                if a > 0.0 {
                    amin += a * lo[j];
                    amax += a * hi[j];
                } else {
                    amin += a * hi[j];
                    amax += a * lo[j];
                }
            }
            let l = p.row_lo[k].max(amin);
            let h = p.row_hi[k].min(amax);
            infeasible_bounds |= l > h + FEAS_TOL * (1.0 + l.abs());
            lo.push(l);
            hi.push(h.max(l));
        }
        let mut cost = p.cost.clone();
        cost.resize(nt, 0.0);
        let mut s = Simplex {
            nr,
            nc,
            nt,
            rows: p.rows.clone(),
            tab: vec![0.0; nr * nt],
            head: (nc..nt).collect(),
            pos: vec![usize::MAX; nt],
            lo,
            hi,
            x: vec![0.0; nt],
            d: cost.clone(),
            cost,
            at_hi: vec![false; nt],
            iterations: 0,
            since_refactor: 0,
            refactor_every: REFACTOR_EVERY,
            infeasible_bounds,
            capped,
        };
        for k in 0..nr {
            s.pos[nc + k] = k;
            for &(j, a) in &p.rows[k] {
                s.tab[k * nt + j] -= a;
            }
            s.tab[k * nt + nc + k] = 1.0;
        }
        for j in 0..nc {
            s.at_hi[j] = s.cost[j] < 0.0;
            s.x[j] = if s.at_hi[j] { s.hi[j] } else { s.lo[j] };
        }
        s.recompute_basics();
        s
    }

    /// Memory held by the dense tableau.
    pub fn tableau_bytes(&self) -> usize {
        self.tab.len() * std::mem::size_of::<f64>()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Values of the structural columns.
    pub fn primal(&self) -> &[f64] {
        &self.x[..self.nc]
    }

    /// Reduced costs of the structural columns; zero on basic ones.
    pub fn reduced_costs(&self) -> &[f64] {
        &self.d[..self.nc]
    }

    /// Whether structural column `j` is nonbasic at its upper bound.
    pub fn at_upper(&self, j: usize) -> bool {
        self.pos[j] == usize::MAX && self.at_hi[j]
    }

    pub fn objective(&self) -> f64 {
        (0..self.nc).map(|j| self.cost[j] * self.x[j]).sum()
    }

    pub fn col_bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    /// Changes the bounds of structural column `j`, keeping dual feasibility.
    pub fn set_col_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
        if lo > hi + FEAS_TOL {
            self.infeasible_bounds = true;
        }
        if self.pos[j] != usize::MAX {
            return;
        }
        if lo < hi {
            if self.d[j] > OPT_TOL {
                self.at_hi[j] = false;
            } else if self.d[j] < -OPT_TOL {
                self.at_hi[j] = true;
            }
        }
        let target = if self.at_hi[j] { hi } else { lo };
        let delta = target - self.x[j];
        if delta != 0.0 {
            self.shift_nonbasic(j, delta);
        }
    }

    /// Re-checks bound consistency after a batch of `set_col_bounds` calls.
    pub fn refresh_bound_status(&mut self) {
        self.infeasible_bounds =
            (0..self.nt).any(|j| self.lo[j] > self.hi[j] + FEAS_TOL * (1.0 + self.lo[j].abs()));
    }

    fn shift_nonbasic(&mut self, j: usize, delta: f64) {
        self.x[j] += delta;
        for k in 0..self.nr {
            let a = self.tab[k * self.nt + j];
            if a != 0.0 {
                self.x[self.head[k]] -= a * delta;
            }
        }
    }

    fn recompute_basics(&mut self) {
        for k in 0..self.nr {
            let row = &self.tab[k * self.nt..(k + 1) * self.nt];
            let mut v = 0.0;
            for j in 0..self.nt {
                if self.pos[j] == usize::MAX && row[j] != 0.0 {
                    v -= row[j] * self.x[j];
                }
            }
            self.x[self.head[k]] = v;
        }
    }

    fn recompute_duals(&mut self) {
        self.d.copy_from_slice(&self.cost);
        for k in 0..self.nr {
            let cb = self.cost[self.head[k]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.tab[k * self.nt..(k + 1) * self.nt];
            for j in 0..self.nt {
                self.d[j] -= cb * row[j];
            }
        }
        for k in 0..self.nr {
            self.d[self.head[k]] = 0.0;
        }
    }

    /// Rebuilds the tableau for the current basis from the original rows.
    /// Returns false if the basis is numerically singular.
    fn refactor(&mut self) -> bool {
        let (nr, nt, nc) = (self.nr, self.nt, self.nc);
        let mut tab = vec![0.0; nr * nt];
        for k in 0..nr {
            for &(j, a) in &self.rows[k] {
                tab[k * nt + j] += a;
            }
            tab[k * nt + nc + k] = -1.0;
        }
        let basics = self.head.clone();
        let mut assigned = vec![false; nr];
        let mut new_head = vec![usize::MAX; nr];
        for &b in &basics {
            let mut best = (usize::MAX, 0.0);
            for k in 0..nr {
                if !assigned[k] {
                    let v = tab[k * nt + b].abs();
                    if v > best.1 {
                        best = (k, v);
                    }
                }
            }
            if best.0 == usize::MAX || best.1 < 1e-11 {
                return false;
            }
            let r = best.0;
            assigned[r] = true;
            new_head[r] = b;
            pivot_rows(&mut tab, nr, nt, r, b);
        }
        self.tab = tab;
        self.head = new_head;
        self.pos.iter_mut().for_each(|p| *p = usize::MAX);
        for (k, &b) in self.head.iter().enumerate() {
            self.pos[b] = k;
        }
        self.recompute_basics();
        self.recompute_duals();
        self.since_refactor = 0;
        true
    }

    /// Returns to the all-logical basis, dropping all factorization history.
    fn reset_basis(&mut self) {
        let (nr, nt, nc) = (self.nr, self.nt, self.nc);
        self.tab.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..nr {
            for &(j, a) in &self.rows[k] {
                self.tab[k * nt + j] -= a;
            }
            self.tab[k * nt + nc + k] = 1.0;
        }
        self.head = (nc..nt).collect();
        self.pos.iter_mut().for_each(|p| *p = usize::MAX);
        for k in 0..nr {
            self.pos[nc + k] = k;
        }
        self.recompute_duals();
        for j in 0..nc {
            self.at_hi[j] = self.d[j] < 0.0;
            self.x[j] = if self.at_hi[j] {
                self.hi[j]
            } else {
                self.lo[j]
            };
        }
        self.recompute_basics();
        self.since_refactor = 0;
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.hi[j] - self.lo[j] <= 1e-12
    }

    fn primal_infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        (self.lo[j] - v).max(v - self.hi[j]).max(0.0)
    }

    /// Largest bound violation over all variables.
    pub fn max_infeasibility(&self) -> f64 {
        (0..self.nt)
            .map(|j| self.primal_infeasibility(j))
            .fold(0.0, f64::max)
    }

    /// Largest `|A x − r|` over rows, measuring accumulated round-off.
    pub fn max_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, row) in self.rows.iter().enumerate() {
            let act: f64 = row.iter().map(|&(j, a)| a * self.x[j]).sum();
            worst = worst.max((act - self.x[self.nc + k]).abs() / (1.0 + act.abs()));
        }
        worst
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let leaving = self.head[r];
        let nt = self.nt;
        let piv = self.tab[r * nt + j];
        let theta = self.d[j] / piv;
        let nz: Vec<usize> = (0..nt).filter(|&c| self.tab[r * nt + c] != 0.0).collect();
        if theta != 0.0 {
            for &c in &nz {
                self.d[c] -= theta * self.tab[r * nt + c];
            }
        }
        self.d[j] = 0.0;
        pivot_rows_sparse(&mut self.tab, self.nr, nt, r, j, &nz);
        self.head[r] = j;
        self.pos[j] = r;
        self.pos[leaving] = usize::MAX;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// Dual simplex from a dual-feasible basis.
    pub fn dual_simplex(&mut self, max_iter: usize) -> LpStatus {
        if self.infeasible_bounds {
            return LpStatus::Infeasible;
        }
        let mut bland = false;
        let mut degenerate = 0;
        for _ in 0..max_iter {
            if self.since_refactor >= self.refactor_every && !self.refactor() {
                self.reset_basis();
            }
            // Leaving row.
            let mut leave = None;
            let mut worst = 0.0;
            for k in 0..self.nr {
                let b = self.head[k];
                let inf = self.primal_infeasibility(b);
                let scaled_tol = FEAS_TOL * (1.0 + self.lo[b].abs().min(self.hi[b].abs()));
                if inf > scaled_tol {
                    if bland {
                        if leave.is_none_or(|(_, lb)| b < lb) {
                            leave = Some((k, b));
                        }
                    } else if inf > worst {
                        worst = inf;
                        leave = Some((k, b));
                    }
                }
            }
            let Some((r, var)) = leave else {
                return LpStatus::Optimal;
            };
            let to_lower = self.x[var] < self.lo[var];
            let target = if to_lower { self.lo[var] } else { self.hi[var] };

            // Harris ratio test over eligible nonbasic columns.
            let nt = self.nt;
            let row = &self.tab[r * nt..(r + 1) * nt];
            let eligible = |c: usize| -> Option<f64> {
                if self.pos[c] != usize::MAX || self.is_fixed(c) {
                    return None;
                }
                let a = row[c];
                if a.abs() <= PIVOT_TOL {
                    return None;
                }
                let ok = if to_lower {
                    (!self.at_hi[c] && a < 0.0) || (self.at_hi[c] && a > 0.0)
                } else {
                    (!self.at_hi[c] && a > 0.0) || (self.at_hi[c] && a < 0.0)
                };
                ok.then_some(a)
            };
            let mut bound = f64::INFINITY;
            for c in 0..nt {
                if let Some(a) = eligible(c) {
                    bound = bound.min((self.d[c].abs() + OPT_TOL) / a.abs());
                }
            }
            if bound.is_infinite() {
                return LpStatus::Infeasible;
            }
            let mut enter = None;
            let mut best = 0.0;
            for c in 0..nt {
                if let Some(a) = eligible(c) {
                    if self.d[c].abs() / a.abs() <= bound {
                        let better = if bland {
                            enter.is_none()
                        } else {
                            a.abs() > best
                        };
                        if better {
                            best = a.abs();
                            enter = Some(c);
                        }
                    }
                }
            }
            let j = enter.expect("bound is finite so a column qualifies");
            let a = self.tab[r * nt + j];
            let t = (self.x[var] - target) / a;
            self.shift_nonbasic(j, t);
            self.x[var] = target;
            self.at_hi[var] = !to_lower;
            if self.d[j].abs() / a.abs() < 1e-12 {
                degenerate += 1;
                bland |= degenerate > DEGENERATE_RUN;
            } else {
                degenerate = 0;
            }
            self.pivot(r, j);
        }
        LpStatus::IterationLimit
    }

    /// Primal simplex from a primal-feasible basis.
    pub fn primal_simplex(&mut self, max_iter: usize) -> LpStatus {
        let mut bland = false;
        let mut degenerate = 0;
        for _ in 0..max_iter {
            if self.since_refactor >= self.refactor_every && !self.refactor() {
                return LpStatus::IterationLimit;
            }
            let mut enter = None;
            let mut best = 0.0;
            for c in 0..self.nt {
                if self.pos[c] != usize::MAX || self.is_fixed(c) {
                    continue;
                }
                let dc = self.d[c];
                let improving =
                    (!self.at_hi[c] && dc < -OPT_TOL) || (self.at_hi[c] && dc > OPT_TOL);
                if improving {
                    if bland {
                        enter = Some(c);
                        break;
                    }
                    if dc.abs() > best {
                        best = dc.abs();
                        enter = Some(c);
                    }
                }
            }
            let Some(j) = enter else {
                return LpStatus::Optimal;
            };
            let dir = if self.at_hi[j] { -1.0 } else { 1.0 };
            let nt = self.nt;

            // Basic k moves by -tab[k][j] * dir per unit step.
            let limit = |k: usize, slack: f64| -> f64 {
                let rate = -self.tab[k * nt + j] * dir;
                let b = self.head[k];
                if rate < -PIVOT_TOL {
                    (self.x[b] - self.lo[b] + slack) / -rate
                } else if rate > PIVOT_TOL {
                    (self.hi[b] - self.x[b] + slack) / rate
                } else {
                    f64::INFINITY
                }
            };
            let mut bound = self.hi[j] - self.lo[j];
            for k in 0..self.nr {
                bound = bound.min(limit(k, FEAS_TOL));
            }
            if bound >= BIG {
                return LpStatus::Unbounded;
            }
            let mut leave = None;
            let mut best = 0.0;
            for k in 0..self.nr {
                if limit(k, 0.0) <= bound {
                    let a = self.tab[k * nt + j].abs();
                    let better = if bland {
                        leave.is_none_or(|l: usize| self.head[k] < self.head[l])
                    } else {
                        a > best
                    };
                    if better {
                        best = a;
                        leave = Some(k);
                    }
                }
            }
            let flip = self.hi[j] - self.lo[j];
            match leave {
                Some(r) if limit(r, 0.0).max(0.0) < flip => {
                    let step = limit(r, 0.0).max(0.0);
                    let b = self.head[r];
                    let rate = -self.tab[r * nt + j] * dir;
                    self.shift_nonbasic(j, dir * step);
                    let to_lower = rate < 0.0;
                    self.x[b] = if to_lower { self.lo[b] } else { self.hi[b] };
                    self.at_hi[b] = !to_lower;
                    if step < 1e-12 {
                        degenerate += 1;
                        bland |= degenerate > DEGENERATE_RUN;
                    } else {
                        degenerate = 0;
                    }
                    self.pivot(r, j);
                }
                _ => {
                    self.shift_nonbasic(j, dir * flip);
                    self.at_hi[j] = !self.at_hi[j];
                    self.iterations += 1;
                }
            }
        }
        LpStatus::IterationLimit
    }

    fn dual_infeasible(&self) -> bool {
        (0..self.nt).any(|c| {
            self.pos[c] == usize::MAX
                && !self.is_fixed(c)
                && ((!self.at_hi[c] && self.d[c] < -OPT_TOL)
                    || (self.at_hi[c] && self.d[c] > OPT_TOL))
        })
    }

    /// Solves from the current basis: dual simplex, then primal clean-up,
    /// repeated until both primal and dual feasibility hold.
    pub fn solve(&mut self) -> LpStatus {
        let st = self.solve_inner();
        if st == LpStatus::Optimal && self.capped.iter().any(|&j| self.x[j].abs() >= 0.5 * BIG) {
            return LpStatus::Unbounded;
        }
        st
    }

    fn solve_inner(&mut self) -> LpStatus {
        let cap = 20 * (self.nr + self.nc) + 1000;
        for attempt in 0..4 {
            if self.dual_infeasible() {
                // Round-off can leave small wrong-signed reduced costs; flipping
                // the affected bounds restores dual feasibility.
                for c in 0..self.nt {
                    if self.pos[c] == usize::MAX && !self.is_fixed(c) {
                        let want_hi = self.d[c] < -OPT_TOL;
                        let want_lo = self.d[c] > OPT_TOL;
                        if (want_hi && !self.at_hi[c]) || (want_lo && self.at_hi[c]) {
                            let target = if want_hi { self.hi[c] } else { self.lo[c] };
                            self.at_hi[c] = want_hi;
                            let delta = target - self.x[c];
                            self.shift_nonbasic(c, delta);
                        }
                    }
                }
            }
            match self.dual_simplex(cap) {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => {
                    // Confirm on a fresh factorization before declaring infeasibility.
                    if attempt == 0 && self.since_refactor > 0 && self.refactor() {
                        continue;
                    }
                    return LpStatus::Infeasible;
                }
                other => {
                    if attempt == 0 {
                        self.start_over();
                        continue;
                    }
                    return other;
                }
            }
            if self.dual_infeasible() {
                match self.primal_simplex(cap) {
                    LpStatus::Optimal => {}
                    LpStatus::Unbounded => return LpStatus::Unbounded,
                    _ => {
                        self.start_over();
                        continue;
                    }
                }
            }
            if self.max_residual() > 1e-9 {
                if !self.refactor() {
                    self.start_over();
                }
                continue;
            }
            if self.max_infeasibility() <= 10.0 * FEAS_TOL * (1.0 + self.scale())
                && !self.dual_infeasible()
            {
                return LpStatus::Optimal;
            }
        }
        if self.max_infeasibility() <= 10.0 * FEAS_TOL * (1.0 + self.scale()) {
            LpStatus::Optimal
        } else {
            LpStatus::IterationLimit
        }
    }

    /// Drops the basis and refactors more often from here on, so a retry
    /// does not replay the pivot sequence that lost accuracy.
    fn start_over(&mut self) {
        self.refactor_every = REFACTOR_CAREFUL;
        self.reset_basis();
    }

    fn scale(&self) -> f64 {
        self.x.iter().fold(0.0_f64, |a, v| a.max(v.abs())).min(1e6) * 1e-3
    }
}

fn pivot_rows(tab: &mut [f64], nr: usize, nt: usize, r: usize, j: usize) {
    let nz: Vec<usize> = (0..nt).filter(|&c| tab[r * nt + c] != 0.0).collect();
    pivot_rows_sparse(tab, nr, nt, r, j, &nz);
}

fn pivot_rows_sparse(tab: &mut [f64], nr: usize, nt: usize, r: usize, j: usize, nz: &[usize]) {
    let piv = tab[r * nt + j];
    for &c in nz {
        tab[r * nt + c] /= piv;
    }
    tab[r * nt + j] = 1.0;
    let (before, rest) = tab.split_at_mut(r * nt);
    let (prow, after) = rest.split_at_mut(nt);
    let eliminate = |row: &mut [f64]| {
        let f = row[j];
        if f == 0.0 {
            return;
        }
        for &c in nz {
            let v = row[c] - f * prow[c];
            row[c] = if v.abs() < DROP_TOL { 0.0 } else { v };
        }
        row[j] = 0.0;
    };
    for row in before.chunks_exact_mut(nt) {
        eliminate(row);
    }
    for row in after.chunks_exact_mut(nt).take(nr - r - 1) {
        eliminate(row);
    }
}
