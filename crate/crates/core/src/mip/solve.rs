//! Branch-and-bound over the binaries with dual-simplex warm starts.

use std::cell::Cell;
use std::rc::Rc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::codec::decode;
use super::heuristic::{approximate_alphas, binary_hints};
use super::model::{MilpModel, Objective};
use super::presolve::{presolve, propagate, Reduced, Row};
use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpStatus, Simplex};
use crate::market::{objectives, verify_equilibrium, PacingOutcome, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Embedded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    /// Relative optimality gap.
    pub mip_gap: f64,
    /// Feasibility tolerance for decoding assignments.
    pub feas_tol: f64,
    pub backend: Backend,
    /// Stop after this many nodes; `None` for no limit.
    pub node_limit: Option<usize>,
    /// Explore the 0-branch first instead of the nearer one.
    pub zero_first: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            time_limit: 300.0,
            mip_gap: 1e-9,
            feas_tol: 1e-7,
            backend: Backend::Embedded,
            node_limit: None,
            zero_first: false,
        }
    }
}

impl SolverConfig {
    pub fn with_time_limit(mut self, secs: f64) -> Self {
        self.time_limit = secs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_limit > 0.0) {
            return Err(Error::InvalidParameter(
                "time limit must be positive".into(),
            ));
        }
        if !(self.mip_gap >= 0.0 && self.feas_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "gap must be >= 0 and feas_tol > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// A solution was found but not certified: relaxed runs with positive
    /// slack, or searches that left nodes unresolved.
    Feasible,
    Infeasible,
    Timeout,
    /// No solution found, and some node LPs could not be solved, so
    /// infeasibility is not proven.
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: usize,
    pub lp_iterations: usize,
    pub wall_time_secs: f64,
    /// Integral LP points whose decoded outcome failed verification.
    pub rejected_incumbents: usize,
    /// Nodes dropped because their LP hit the iteration limit even after a
    /// cold restart.
    #[serde(default)]
    pub unresolved_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub outcome: Option<PacingOutcome>,
    pub objective_value: Option<f64>,
    /// Full model assignment behind `outcome`.
    pub assignment: Option<Vec<f64>>,
    /// Whether `outcome` passed the equilibrium verifier.
    pub verified: bool,
    /// Total slack `Σ z_i` of relaxed runs.
    pub relaxed_slack: Option<f64>,
    pub stats: SolveStats,
}

impl SolveResult {
    fn empty(status: SolveStatus, stats: SolveStats) -> Self {
        Self {
            status,
            outcome: None,
            objective_value: None,
            assignment: None,
            verified: false,
            relaxed_slack: None,
            stats,
        }
    }

    pub fn has_solution(&self) -> bool {
        self.outcome.is_some()
    }
}

/// A MIP solver that can stand in for the embedded one.
pub trait MipBackend {
    fn name(&self) -> &str;
    fn solve(&self, model: &MilpModel, config: &SolverConfig) -> Result<SolveResult>;
}

/// The built-in branch-and-bound solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmbeddedBackend;

impl MipBackend for EmbeddedBackend {
    fn name(&self) -> &str {
        "embedded"
    }

    fn solve(&self, model: &MilpModel, config: &SolverConfig) -> Result<SolveResult> {
        solve(model, config)
    }
}

/// Result of a continuous relaxation with some binaries fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRelaxation {
    pub status: LpStatus,
    /// Optimal value in the natural sense of the objective.
    pub objective: Option<f64>,
    pub point: Option<Vec<f64>>,
}

/// Solves the continuous relaxation of `model` with `fixings` applied as
/// `(variable, value)` bound pairs.
pub fn lp_relax_solve(model: &MilpModel, fixings: &[(usize, f64)]) -> Result<LpRelaxation> {
    let sign = if model.objective.maximize() {
        -1.0
    } else {
        1.0
    };
    let mut lp = LpProblem::default();
    for v in &model.vars {
        lp.add_col(0.0, v.lo, v.hi);
    }
    for (k, c) in model.cost.iter().enumerate() {
        lp.cost[k] = sign * c;
    }
    for &(k, val) in fixings {
        if k >= model.num_vars() {
            return Err(Error::InvalidParameter(format!(
                "fixing of unknown variable {k}"
            )));
        }
        lp.col_lo[k] = lp.col_lo[k].max(val);
        lp.col_hi[k] = lp.col_hi[k].min(val);
    }
    for c in &model.constraints {
        lp.add_row(c.terms.clone(), c.lo, c.hi);
    }
    let mut s = Simplex::new(&lp);
    let status = s.solve();
    Ok(match status {
        LpStatus::Optimal => LpRelaxation {
            status,
            objective: Some(sign * s.objective()),
            point: Some(s.primal().to_vec()),
        },
        _ => LpRelaxation {
            status,
            objective: None,
            point: None,
        },
    })
}

/// Parent LP state shared by both children, with a live-byte budget.
struct Snapshot {
    simplex: Simplex,
    bytes: usize,
    live: Rc<Cell<usize>>,
}

impl Drop for Snapshot {
    fn drop(&mut self) {
        self.live.set(self.live.get() - self.bytes);
    }
}

struct Node {
    /// `(reduced column, lo, hi)` bound changes from the root: branching
    /// decisions and reduced-cost tightenings.
    fixings: Vec<(usize, f64, f64)>,
    parent: Option<Rc<Snapshot>>,
    /// Parent LP bound, minimization sense.
    bound: f64,
    /// Branch that created the node: column, direction (0 down, 1 up) and
    /// distance moved.
    origin: Option<(usize, usize, f64)>,
}

const SNAPSHOT_BUDGET: usize = 1 << 30;
const RESTART_EVERY: usize = 1000;
const INT_TOL: f64 = 1e-6;

struct Search<'a> {
    model: &'a MilpModel,
    cfg: &'a SolverConfig,
    red: Reduced,
    root: Simplex,
    root_lo: Vec<f64>,
    root_hi: Vec<f64>,
    rank: Vec<(u8, usize)>,
    /// Model rows followed by the objective cutoff row, for node propagation.
    rows: Vec<Row>,
    /// Per column and direction: summed bound gain per unit moved, and count.
    pseudo: Vec<[(f64, u32); 2]>,
    /// Preferred value per reduced binary column.
    hint: Vec<Option<f64>>,
    tol: Tolerance,
    stats: SolveStats,
    best: Option<Incumbent>,
    live: Rc<Cell<usize>>,
}

struct Incumbent {
    /// Minimization-sense value.
    value: f64,
    x: Vec<f64>,
    outcome: PacingOutcome,
    verified: bool,
}

impl Search<'_> {
    fn cutoff(&self) -> f64 {
        match &self.best {
            Some(b) => b.value - (self.cfg.mip_gap * b.value.abs()).max(1e-9),
            None => f64::INFINITY,
        }
    }

    /// Sets up the LP for a node. Returns `None` when propagation proves the node infeasible.
    fn node_lp(&self, node: &Node) -> Option<Simplex> {
        let mut lo = self.root_lo.clone();
        let mut hi = self.root_hi.clone();
        for &(c, l, h) in &node.fixings {
            lo[c] = lo[c].max(l);
            hi[c] = hi[c].min(h);
        }
        if !propagate(&self.rows, &mut lo, &mut hi, &self.red.is_int, true, 10) {
            return None;
        }
        let mut s = match &node.parent {
            Some(p) => p.simplex.clone(),
            None => self.root.clone(),
        };
        for c in 0..lo.len() {
            if s.col_bounds(c) != (lo[c], hi[c]) {
                s.set_col_bounds(c, lo[c], hi[c]);
            }
        }
        s.refresh_bound_status();
        Some(s)
    }

    /// A fresh simplex on the reduced LP with the bounds of `warm`.
    fn cold_lp(&self, warm: &Simplex) -> Simplex {
        let mut s = Simplex::new(&self.red.lp);
        for c in 0..self.red.lp.num_cols() {
            let (l, h) = warm.col_bounds(c);
            s.set_col_bounds(c, l, h);
        }
        s.refresh_bound_status();
        s
    }

    fn record_gain(&mut self, node: &Node, bound: f64) {
        if let Some((c, dir, dist)) = node.origin {
            if node.bound.is_finite() && dist > 0.0 {
                let e = &mut self.pseudo[c][dir];
                e.0 += (bound - node.bound).max(0.0) / dist;
                e.1 += 1;
            }
        }
    }

    /// Pseudocost branching: the fractional binary maximizing the product of
    /// estimated down and up gains. Columns without history use the mean
    /// over those with history. Falls back to most fractional while no gain
    /// has been observed, as in feasibility runs.
    fn select_branch(&self, x: &[f64]) -> Option<(usize, f64)> {
        let mut mean = [0.0; 2];
        for dir in 0..2 {
            let (sum, cnt) = self.pseudo.iter().fold((0.0, 0u32), |(s, n), p| {
                if p[dir].1 > 0 {
                    (s + p[dir].0 / p[dir].1 as f64, n + 1)
                } else {
                    (s, n)
                }
            });
            mean[dir] = if cnt > 0 { sum / cnt as f64 } else { 0.0 };
        }
        if mean[0] <= 0.0 && mean[1] <= 0.0 {
            return self.most_fractional(x);
        }
        let est = |c: usize, dir: usize| {
            let (sum, cnt) = self.pseudo[c][dir];
            if cnt > 0 {
                sum / cnt as f64
            } else {
                mean[dir]
            }
        };
        let mut best: Option<(usize, f64)> = None;
        for (c, &is_int) in self.red.is_int.iter().enumerate() {
            if !is_int {
                continue;
            }
            let f = x[c] - x[c].floor();
            if f.min(1.0 - f) <= INT_TOL {
                continue;
            }
            let score = (est(c, 0) * f).max(1e-9) * (est(c, 1) * (1.0 - f)).max(1e-9);
            let better = match best {
                None => true,
                Some((b, bs)) => {
                    score > bs * (1.0 + 1e-9)
                        || (score >= bs * (1.0 - 1e-9) && self.rank[c] < self.rank[b])
                }
            };
            if better {
                best = Some((c, score));
            }
        }
        best.map(|(c, _)| (c, x[c]))
    }

    fn most_fractional(&self, x: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (c, &is_int) in self.red.is_int.iter().enumerate() {
            if !is_int {
                continue;
            }
            let frac = x[c] - x[c].floor();
            let dist = frac.min(1.0 - frac);
            if dist <= INT_TOL {
                continue;
            }
            let better = match best {
                None => true,
                Some((b, bd)) => {
                    dist > bd + 1e-12 || ((dist - bd).abs() <= 1e-12 && self.rank[c] < self.rank[b])
                }
            };
            if better {
                best = Some((c, dist));
            }
        }
        best.map(|(c, _)| (c, x[c]))
    }

    /// Fixes every binary at its rounded value, re-solves and verifies.
    fn try_incumbent(&mut self, lp: &Simplex) {
        let mut s = lp.clone();
        for (c, &is_int) in self.red.is_int.iter().enumerate() {
            if is_int {
                let v = s.primal()[c].round();
                s.set_col_bounds(c, v, v);
            }
        }
        s.refresh_bound_status();
        let status = s.solve();
        self.stats.lp_iterations += s.iterations().saturating_sub(lp.iterations());
        if status != LpStatus::Optimal {
            self.stats.rejected_incumbents += 1;
            return;
        }
        let value = s.objective() + self.red.offset;
        if value >= self.cutoff() {
            return;
        }
        let x = self.red.expand(s.primal());
        let outcome = match decode(self.model, &x, self.cfg.feas_tol) {
            Ok(o) => o,
            Err(_) => {
                self.stats.rejected_incumbents += 1;
                return;
            }
        };
        let slack = self.slack(&x);
        let verified = verify_equilibrium(&self.model.instance, &outcome, &self.tol)
            .map(|v| v.is_accepted())
            .unwrap_or(false);
        let certified = slack.is_none_or(|z| z <= 1e-6);
        if !verified && certified {
            self.stats.rejected_incumbents += 1;
            return;
        }
        self.best = Some(Incumbent {
            value,
            x,
            outcome,
            verified,
        });
        let cutoff = self.cutoff() - self.red.offset;
        self.rows.last_mut().expect("objective row").hi = cutoff;
    }

    /// Bound changes implied by reduced costs: moving a nonbasic column off
    /// its bound raises the LP value by at least `|d| · distance`.
    fn reduced_cost_bounds(&self, lp: &Simplex, bound: f64) -> Vec<(usize, f64, f64)> {
        let gap = self.cutoff() - bound;
        if !gap.is_finite() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (c, &d) in lp.reduced_costs().iter().enumerate() {
            let (l, h) = lp.col_bounds(c);
            if h - l <= 1e-9 || d.abs() <= 1e-7 {
                continue;
            }
            let reach = gap / d.abs();
            if reach >= h - l {
                continue;
            }
            let int = self.red.is_int[c];
            if d > 0.0 && !lp.at_upper(c) {
                let nh = if int {
                    (l + reach + 1e-9).floor()
                } else {
                    l + reach + 1e-9 * (1.0 + h.abs())
                };
                if nh < h {
                    out.push((c, l, nh));
                }
            } else if d < 0.0 && lp.at_upper(c) {
                let nl = if int {
                    (h - reach - 1e-9).ceil()
                } else {
                    h - reach - 1e-9 * (1.0 + l.abs())
                };
                if nl > l {
                    out.push((c, nl, h));
                }
            }
        }
        out
    }

    fn slack(&self, x: &[f64]) -> Option<f64> {
        self.model.z(0).map(|_| {
            (0..self.model.n)
                .map(|i| x[self.model.z(i).expect("relaxed")])
                .sum()
        })
    }

    fn done_early(&self) -> bool {
        match &self.best {
            Some(b) => match self.model.objective {
                Objective::Feasibility => true,
                Objective::RelaxedFeasibility => b.value <= 1e-9,
                _ => false,
            },
            None => false,
        }
    }

    fn run(&mut self, start: Instant) -> SolveStatus {
        let mut stack = vec![Node {
            fixings: Vec::new(),
            parent: None,
            bound: f64::NEG_INFINITY,
            origin: None,
        }];
        let mut since_restart = 0;
        while let Some(node) = stack.pop() {
            if start.elapsed().as_secs_f64() > self.cfg.time_limit
                || self.cfg.node_limit.is_some_and(|l| self.stats.nodes >= l)
            {
                return SolveStatus::Timeout;
            }
            if node.bound >= self.cutoff() {
                continue;
            }
            self.stats.nodes += 1;
            since_restart += 1;
            let Some(mut lp) = self.node_lp(&node) else {
                continue;
            };
            let before = lp.iterations();
            let mut status = lp.solve();
            self.stats.lp_iterations += lp.iterations() - before;
            if matches!(status, LpStatus::IterationLimit | LpStatus::Unbounded) {
                lp = self.cold_lp(&lp);
                status = lp.solve();
                self.stats.lp_iterations += lp.iterations();
            }
            match status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => continue,
                _ => {
                    self.stats.unresolved_nodes += 1;
                    continue;
                }
            }
            let bound = lp.objective() + self.red.offset;
            self.record_gain(&node, bound);
            if bound >= self.cutoff() {
                continue;
            }
            match self.select_branch(lp.primal()) {
                None => {
                    self.try_incumbent(&lp);
                    if self.done_early() {
                        return SolveStatus::Optimal;
                    }
                }
                Some((c, value)) => {
                    let tightened = self.reduced_cost_bounds(&lp, bound);
                    let bytes = lp.tableau_bytes();
                    let parent = if self.live.get() + bytes <= SNAPSHOT_BUDGET {
                        self.live.set(self.live.get() + bytes);
                        Some(Rc::new(Snapshot {
                            simplex: lp,
                            bytes,
                            live: Rc::clone(&self.live),
                        }))
                    } else {
                        None
                    };
                    let up_first = match self.hint[c] {
                        Some(h) if !self.cfg.zero_first => h >= 0.5,
                        _ => !self.cfg.zero_first && value >= 0.5,
                    };
                    let order = if up_first { [0.0, 1.0] } else { [1.0, 0.0] };
                    for v in order {
                        let mut fixings = node.fixings.clone();
                        fixings.extend_from_slice(&tightened);
                        fixings.push((c, v, v));
                        let dist = if v == 0.0 { value } else { 1.0 - value };
                        let origin = Some((c, v as usize, dist));
                        stack.push(Node {
                            fixings,
                            parent: parent.clone(),
                            bound,
                            origin,
                        });
                    }
                }
            }
            if since_restart >= RESTART_EVERY && !stack.is_empty() {
                since_restart = 0;
                let best = (0..stack.len())
                    .min_by(|&a, &b| stack[a].bound.total_cmp(&stack[b].bound))
                    .expect("stack is non-empty");
                let node = stack.remove(best);
                stack.push(node);
            }
        }
        SolveStatus::Optimal
    }
}

/// Branch-and-bound solve of `model`.
///
/// Incumbents come from LP points with integral binaries: the binaries are
/// fixed, the LP is re-solved, and the decoded outcome must pass the
/// equilibrium verifier (relaxed runs with positive slack are kept but
/// reported unverified). Search is depth-first toward the nearer child, with
/// a jump to the best open bound every 1000 nodes.
pub fn solve(model: &MilpModel, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let start = Instant::now();
    let mut stats = SolveStats::default();
    let Some(red) = presolve(model) else {
        stats.wall_time_secs = start.elapsed().as_secs_f64();
        return Ok(SolveResult::empty(SolveStatus::Infeasible, stats));
    };
    let root = Simplex::new(&red.lp);
    let rank = red
        .cols
        .iter()
        .map(|&k| (model.vars[k].family.branch_rank(), k))
        .collect();
    let alphas = approximate_alphas(&model.values, &model.budgets, 300);
    let full_hint = binary_hints(model, &alphas);
    let hint = red.cols.iter().map(|&k| full_hint[k]).collect();
    let ncols = red.cols.len();
    let mut rows = red.rows.clone();
    let objective_terms = red
        .lp
        .cost
        .iter()
        .enumerate()
        .filter(|c| *c.1 != 0.0)
        .map(|(c, &a)| (c, a))
        .collect();
    rows.push(Row {
        terms: objective_terms,
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    });
    let mut search = Search {
        model,
        cfg: config,
        root_lo: red.lp.col_lo.clone(),
        root_hi: red.lp.col_hi.clone(),
        root,
        red,
        rank,
        rows,
        pseudo: vec![[(0.0, 0); 2]; ncols],
        hint,
        tol: Tolerance::default(),
        stats,
        best: None,
        live: Rc::new(Cell::new(0)),
    };
    // Solve the root once so every cold node starts from its optimal basis.
    let root_status = search.root.solve();
    search.stats.lp_iterations += search.root.iterations();
    let status = if root_status == LpStatus::Infeasible {
        SolveStatus::Infeasible
    } else {
        search.run(start)
    };
    let mut stats = search.stats;
    stats.wall_time_secs = start.elapsed().as_secs_f64();
    let sign = if model.objective.maximize() {
        -1.0
    } else {
        1.0
    };
    let unresolved = stats.unresolved_nodes > 0;
    Ok(match search.best {
        None => SolveResult::empty(
            match status {
                SolveStatus::Timeout => status,
                _ if unresolved => SolveStatus::NumericalFailure,
                _ => SolveStatus::Infeasible,
            },
            stats,
        ),
        Some(b) => {
            let slack = model.z(0).map(|_| {
                (0..model.n)
                    .map(|i| b.x[model.z(i).expect("relaxed")])
                    .sum::<f64>()
            });
            let status = match status {
                SolveStatus::Timeout => SolveStatus::Timeout,
                _ if slack.is_some_and(|z| z > 1e-6) || unresolved => SolveStatus::Feasible,
                _ => SolveStatus::Optimal,
            };
            // Report objectives of the decoded outcome; LP values carry round-off.
            let value = match (model.objective, objectives(&model.instance, &b.outcome)) {
                (Objective::MaxRevenue | Objective::MinRevenue, Ok(o)) => o.revenue,
                (Objective::MaxPacedWelfare | Objective::MinPacedWelfare, Ok(o)) => o.paced_welfare,
                _ => sign * b.value,
            };
            SolveResult {
                status,
                objective_value: Some(value),
                outcome: Some(b.outcome),
                assignment: Some(b.x),
                verified: b.verified,
                relaxed_slack: slack,
                stats,
            }
        }
    })
}
