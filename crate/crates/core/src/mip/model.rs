//! Mixed-integer encoding of the equilibrium conditions.
//!
//! Variables per bidder `i` and good `j`:
//!
//! | name | domain | meaning |
//! |------|--------|---------|
//! | `alpha_i` | `[0, 1]` | pacing multiplier |
//! | `s_ij` | `[0, B_i]` | spend |
//! | `p_j` | `[0, v̄_j]` | price |
//! | `h_j` | `[0, v̄_j]` | highest paced bid |
//! | `z_i` | `[0, 1]` | slack on the pacing rule, relaxed mode only |
//! | `d_ij` | binary | `i` may receive `j` |
//! | `y_i` | binary | budget is exhausted |
//! | `w_ij` | binary | `i` is the designated winner of `j` |
//! | `r_ij` | binary | `i` sets the price of `j` |
//!
//! Constraint families, with `v̄_j = max_i v_ij`:
//!
//! 1. `Σ_j s_ij <= B_i`
//! 2. `Σ_j s_ij >= y_i B_i`
//! 3. `alpha_i >= 1 − y_i` (`− z_i` when relaxed)
//! 4. `Σ_i s_ij = p_j`
//! 5. `s_ij <= B_i d_ij`
//! 6. `h_j >= alpha_i v_ij`
//! 7. `h_j <= alpha_i v_ij + (1 − d_ij) v̄_j`
//! 8. `w_ij <= d_ij`
//! 9. `p_j >= alpha_i v_ij − w_ij v_ij`
//! 10. `p_j <= alpha_i v_ij + (1 − r_ij) v̄_j`
//! 11. `Σ_i w_ij = 1`
//! 12. `Σ_i r_ij = 1`
//! 13. `r_ij + w_ij <= 1`
//!
//! Unlimited budgets become `Σ_j v̄_j + 1`, which no bidder can spend. A
//! single-bidder market gets a zero-value padding bidder with budget 1 so a
//! price setter exists.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::PacingInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Feasibility,
    RelaxedFeasibility,
    MaxRevenue,
    MinRevenue,
    MaxPacedWelfare,
    MinPacedWelfare,
}

impl Objective {
    pub const ALL: [Objective; 6] = [
        Objective::Feasibility,
        Objective::RelaxedFeasibility,
        Objective::MaxRevenue,
        Objective::MinRevenue,
        Objective::MaxPacedWelfare,
        Objective::MinPacedWelfare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Feasibility => "feasibility",
            Objective::RelaxedFeasibility => "relaxed_feasibility",
            Objective::MaxRevenue => "max_revenue",
            Objective::MinRevenue => "min_revenue",
            Objective::MaxPacedWelfare => "max_paced_welfare",
            Objective::MinPacedWelfare => "min_paced_welfare",
        }
    }

    pub fn is_relaxed(self) -> bool {
        self == Objective::RelaxedFeasibility
    }

    pub fn maximize(self) -> bool {
        matches!(self, Objective::MaxRevenue | Objective::MaxPacedWelfare)
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Objective::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown objective `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Alpha,
    Spend,
    Price,
    Height,
    Slack,
    Win,
    Binding,
    Winner,
    Runner,
}

impl Family {
    pub fn is_binary(self) -> bool {
        matches!(
            self,
            Family::Win | Family::Binding | Family::Winner | Family::Runner
        )
    }

    fn prefix(self) -> &'static str {
        match self {
            Family::Alpha => "alpha",
            Family::Spend => "s",
            Family::Price => "p",
            Family::Height => "h",
            Family::Slack => "z",
            Family::Win => "d",
            Family::Binding => "y",
            Family::Winner => "w",
            Family::Runner => "r",
        }
    }

    /// Branching priority: lower goes first among equally fractional binaries.
    pub fn branch_rank(self) -> u8 {
        match self {
            Family::Winner => 0,
            Family::Runner => 1,
            Family::Win => 2,
            Family::Binding => 3,
            _ => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Var {
    pub family: Family,
    pub bidder: Option<usize>,
    pub good: Option<usize>,
    pub lo: f64,
    pub hi: f64,
}

impl Var {
    pub fn name(&self) -> String {
        let mut s = self.family.prefix().to_string();
        for k in [self.bidder, self.good].into_iter().flatten() {
            let _ = write!(s, "_{k}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// Family number, 1 to 13.
    pub family: u8,
    pub terms: Vec<(usize, f64)>,
    pub lo: f64,
    pub hi: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(k, a)| a * x[k]).sum()
    }

    /// Amount by which `x` violates this row.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        (self.lo - a).max(a - self.hi).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    /// The market as given, before padding.
    pub instance: PacingInstance,
    pub objective: Objective,
    /// Bidders in the model, padding included.
    pub n: usize,
    pub m: usize,
    pub padded: bool,
    /// Finite budgets used in the big-M terms.
    pub budgets: Vec<f64>,
    /// Values in the model, padding included.
    pub values: Vec<Vec<f64>>,
    pub vbar: Vec<f64>,
    pub vars: Vec<Var>,
    pub constraints: Vec<Constraint>,
    /// Objective coefficients in the natural sense of `objective`.
    pub cost: Vec<f64>,
    offsets: Offsets,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Offsets {
    alpha: usize,
    s: usize,
    p: usize,
    h: usize,
    z: usize,
    d: usize,
    y: usize,
    w: usize,
    r: usize,
}

impl MilpModel {
    pub fn alpha(&self, i: usize) -> usize {
        self.offsets.alpha + i
    }
    pub fn s(&self, i: usize, j: usize) -> usize {
        self.offsets.s + i * self.m + j
    }
    pub fn p(&self, j: usize) -> usize {
        self.offsets.p + j
    }
    pub fn h(&self, j: usize) -> usize {
        self.offsets.h + j
    }
    /// Slack variable of bidder `i`; only present in relaxed mode.
    pub fn z(&self, i: usize) -> Option<usize> {
        self.objective.is_relaxed().then_some(self.offsets.z + i)
    }
    pub fn d(&self, i: usize, j: usize) -> usize {
        self.offsets.d + i * self.m + j
    }
    pub fn y(&self, i: usize) -> usize {
        self.offsets.y + i
    }
    pub fn w(&self, i: usize, j: usize) -> usize {
        self.offsets.w + i * self.m + j
    }
    pub fn r(&self, i: usize, j: usize) -> usize {
        self.offsets.r + i * self.m + j
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.family.is_binary()).count()
    }

    pub fn num_continuous(&self) -> usize {
        self.num_vars() - self.num_binaries()
    }

    /// Objective value of an assignment in its natural sense.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Restricts the multiplier of bidder `i` to `[lo, hi]`.
    pub fn bound_alpha(&mut self, i: usize, lo: f64, hi: f64) -> Result<()> {
        if i >= self.instance.n() {
            return Err(Error::BidderIndex {
                index: i,
                n: self.instance.n(),
            });
        }
        let k = self.alpha(i);
        self.vars[k].lo = self.vars[k].lo.max(lo);
        self.vars[k].hi = self.vars[k].hi.min(hi);
        Ok(())
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self
            .vars
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lo - xv).max(xv - v.hi).max(0.0));
        let rows = self.constraints.iter().map(|c| c.violation(x));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    /// Plain-text export in the CPLEX LP file format.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "\\ pacing equilibrium model, objective {}",
            self.objective.name()
        );
        let _ = writeln!(
            out,
            "{}",
            if self.objective.maximize() {
                "Maximize"
            } else {
                "Minimize"
            }
        );
        let _ = writeln!(
            out,
            " obj: {}",
            format_terms(self, self.cost.iter().copied().enumerate())
        );
        let _ = writeln!(out, "Subject To");
        for (k, c) in self.constraints.iter().enumerate() {
            let lhs = format_terms(self, c.terms.iter().copied());
            let name = format!("c{}_{}", c.family, k);
            if c.lo == c.hi {
                let _ = writeln!(out, " {name}: {lhs} = {}", c.lo);
            } else {
                if c.lo > f64::NEG_INFINITY {
                    let _ = writeln!(out, " {name}_lo: {lhs} >= {}", c.lo);
                }
                if c.hi < f64::INFINITY {
                    let _ = writeln!(out, " {name}_hi: {lhs} <= {}", c.hi);
                }
            }
        }
        let _ = writeln!(out, "Bounds");
        for v in self.vars.iter().filter(|v| !v.family.is_binary()) {
            let _ = writeln!(out, " {} <= {} <= {}", v.lo, v.name(), v.hi);
        }
        let _ = writeln!(out, "Binaries");
        for v in self.vars.iter().filter(|v| v.family.is_binary()) {
            if v.lo == v.hi {
                let _ = writeln!(out, " {}  \\ fixed {}", v.name(), v.lo);
            } else {
                let _ = writeln!(out, " {}", v.name());
            }
        }
        out.push_str("End\n");
        out
    }
}

fn format_terms(model: &MilpModel, terms: impl Iterator<Item = (usize, f64)>) -> String {
    let mut s = String::new();
    for (k, a) in terms.filter(|t| t.1 != 0.0) {
        let sign = if a < 0.0 { "-" } else { "+" };
        if s.is_empty() && a >= 0.0 {
            let _ = write!(s, "{} {}", a, model.vars[k].name());
        } else {
            let _ = write!(s, " {sign} {} {}", a.abs(), model.vars[k].name());
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Builds the model of `objective` over `instance`.
///
/// Binaries that cannot be 1 in any equilibrium are fixed to 0 through their
/// bounds: outside relaxed mode every multiplier is positive, so a bidder
/// with value 0 on a good someone else values never holds the top bid there,
/// and never sets a positive price when two other bidders value the good.
///
/// ```
/// use pacing_core::mip::{build_model, Objective};
/// use pacing_core::PacingInstance;
/// let inst = PacingInstance::new(vec![vec![3.0], vec![7.0]], vec![1.0, 1.0]).unwrap();
/// let model = build_model(&inst, Objective::MaxRevenue).unwrap();
/// assert_eq!(model.vbar, vec![7.0]);
/// assert_eq!((model.num_continuous(), model.num_binaries()), (6, 8));
/// ```
pub fn build_model(instance: &PacingInstance, objective: Objective) -> Result<MilpModel> {
    let mut values = instance.values().to_vec();
    let mut raw_budgets = instance.budgets().to_vec();
    let padded = instance.n() == 1;
    if padded {
        values.push(vec![0.0; instance.m()]);
        raw_budgets.push(1.0);
    }
    let (n, m) = (values.len(), instance.m());
    let vbar: Vec<f64> = (0..m)
        .map(|j| values.iter().map(|r| r[j]).fold(0.0, f64::max))
        .collect();
    let safe = vbar.iter().sum::<f64>() + 1.0;
    let budgets: Vec<f64> = raw_budgets
        .iter()
        .map(|&b| if b.is_finite() { b } else { safe })
        .collect();
    let relaxed = objective.is_relaxed();

    let nm = n * m;
    let z_len = if relaxed { n } else { 0 };
    let alpha = 0;
    let s = alpha + n;
    let p = s + nm;
    let h = p + m;
    let z = h + m;
    let d = z + z_len;
    let y = d + nm;
    let w = y + n;
    let r = w + nm;
    let total = r + nm;
    let offsets = Offsets {
        alpha,
        s,
        p,
        h,
        z,
        d,
        y,
        w,
        r,
    };

    let mut vars = Vec::with_capacity(total);
    let cont = |family, bidder, good, hi: f64| Var {
        family,
        bidder,
        good,
        lo: 0.0,
        hi,
    };
    for i in 0..n {
        // A paced bidder spends its budget and pays at most its own bid, so
        // B_i <= α_i Σ_j v_ij. Relaxed runs admit non-equilibria.
        let total: f64 = values[i].iter().sum();
        let lo = if relaxed {
            0.0
        } else if total > 0.0 {
            ((budgets[i] - 1e-6 * (1.0 + budgets[i])) / total).clamp(0.0, 1.0)
        } else {
            1.0
        };
        vars.push(Var {
            lo,
            ..cont(Family::Alpha, Some(i), None, 1.0)
        });
    }
    for i in 0..n {
        for j in 0..m {
            vars.push(cont(Family::Spend, Some(i), Some(j), budgets[i]));
        }
    }
    for j in 0..m {
        vars.push(cont(Family::Price, None, Some(j), vbar[j]));
    }
    for j in 0..m {
        vars.push(cont(Family::Height, None, Some(j), vbar[j]));
    }
    for i in 0..z_len {
        vars.push(cont(Family::Slack, Some(i), None, 1.0));
    }
    for (family, per_good) in [
        (Family::Win, true),
        (Family::Binding, false),
        (Family::Winner, true),
        (Family::Runner, true),
    ] {
        for i in 0..n {
            if per_good {
                for j in 0..m {
                    vars.push(cont(family, Some(i), Some(j), 1.0));
                }
            } else {
                vars.push(cont(family, Some(i), None, 1.0));
            }
        }
    }
    debug_assert_eq!(vars.len(), total);

    let mut model = MilpModel {
        instance: instance.clone(),
        objective,
        n,
        m,
        padded,
        budgets,
        values,
        vbar,
        vars,
        constraints: Vec::new(),
        cost: vec![0.0; total],
        offsets,
    };

    let inf = f64::INFINITY;
    let mut rows = Vec::new();
    let mut push = |family: u8, terms: Vec<(usize, f64)>, lo: f64, hi: f64| {
        rows.push(Constraint {
            family,
            terms,
            lo,
            hi,
        });
    };
    let mm = &model;
    for i in 0..n {
        let b = mm.budgets[i];
        let spend: Vec<(usize, f64)> = (0..m).map(|j| (mm.s(i, j), 1.0)).collect();
        push(1, spend.clone(), -inf, b);
        let mut t2 = spend;
        t2.push((mm.y(i), -b));
        push(2, t2, 0.0, inf);
        let mut t3 = vec![(mm.alpha(i), 1.0), (mm.y(i), 1.0)];
        if let Some(zi) = mm.z(i) {
            t3.push((zi, 1.0));
        }
        push(3, t3, 1.0, inf);
    }
    for j in 0..m {
        let mut t4: Vec<(usize, f64)> = (0..n).map(|i| (mm.s(i, j), 1.0)).collect();
        t4.push((mm.p(j), -1.0));
        push(4, t4, 0.0, 0.0);
    }
    for i in 0..n {
        for j in 0..m {
            let v = mm.values[i][j];
            let vb = mm.vbar[j];
            push(
                5,
                vec![(mm.s(i, j), 1.0), (mm.d(i, j), -mm.budgets[i])],
                -inf,
                0.0,
            );
            push(6, vec![(mm.h(j), 1.0), (mm.alpha(i), -v)], 0.0, inf);
            push(
                7,
                vec![(mm.h(j), 1.0), (mm.alpha(i), -v), (mm.d(i, j), vb)],
                -inf,
                vb,
            );
            push(8, vec![(mm.w(i, j), 1.0), (mm.d(i, j), -1.0)], -inf, 0.0);
            push(
                9,
                vec![(mm.p(j), 1.0), (mm.alpha(i), -v), (mm.w(i, j), v)],
                0.0,
                inf,
            );
            push(
                10,
                vec![(mm.p(j), 1.0), (mm.alpha(i), -v), (mm.r(i, j), vb)],
                -inf,
                vb,
            );
            push(13, vec![(mm.r(i, j), 1.0), (mm.w(i, j), 1.0)], -inf, 1.0);
        }
    }
    for j in 0..m {
        push(11, (0..n).map(|i| (mm.w(i, j), 1.0)).collect(), 1.0, 1.0);
        push(12, (0..n).map(|i| (mm.r(i, j), 1.0)).collect(), 1.0, 1.0);
    }
    rows.sort_by_key(|c| c.family);
    model.constraints = rows;

    match objective {
        Objective::MaxRevenue | Objective::MinRevenue => {
            for j in 0..m {
                let k = model.p(j);
                model.cost[k] = 1.0;
            }
        }
        Objective::MaxPacedWelfare | Objective::MinPacedWelfare => {
            for j in 0..m {
                let k = model.h(j);
                model.cost[k] = 1.0;
            }
        }
        Objective::RelaxedFeasibility => {
            for i in 0..n {
                let k = model.z(i).expect("relaxed model has slacks");
                model.cost[k] = 1.0;
            }
        }
        Objective::Feasibility => {}
    }

    if !relaxed {
        for j in 0..m {
            if model.vbar[j] <= 0.0 {
                continue;
            }
            let interested = (0..n).filter(|&i| model.values[i][j] > 0.0).count();
            for i in 0..n {
                if model.values[i][j] > 0.0 {
                    continue;
                }
                for k in [model.d(i, j), model.w(i, j)] {
                    model.vars[k].hi = 0.0;
                }
                if interested >= 2 {
                    let k = model.r(i, j);
                    model.vars[k].hi = 0.0;
                }
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_one() -> PacingInstance {
        PacingInstance::new(vec![vec![3.0], vec![7.0]], vec![1.0, f64::INFINITY]).unwrap()
    }

    #[test]
    fn variable_counts() {
        let m = build_model(&two_by_one(), Objective::Feasibility).unwrap();
        assert_eq!(m.num_continuous(), 2 + 2 + 1 + 1);
        assert_eq!(m.num_binaries(), 2 + 2 + 2 + 2);
        let families: std::collections::BTreeSet<u8> =
            m.constraints.iter().map(|c| c.family).collect();
        assert_eq!(families.len(), 13);
        let relaxed = build_model(&two_by_one(), Objective::RelaxedFeasibility).unwrap();
        assert_eq!(relaxed.num_continuous(), 8);
    }

    #[test]
    fn unlimited_budget_is_replaced() {
        let m = build_model(&two_by_one(), Objective::MaxRevenue).unwrap();
        assert_eq!(m.budgets, vec![1.0, 8.0]);
    }

    #[test]
    fn single_bidder_is_padded() {
        let inst = PacingInstance::new(vec![vec![1.0, 2.0]], vec![1.0]).unwrap();
        let m = build_model(&inst, Objective::Feasibility).unwrap();
        assert!(m.padded);
        assert_eq!(m.n, 2);
        assert_eq!(m.values[1], vec![0.0, 0.0]);
        assert_eq!(m.vars[m.w(1, 0)].hi, 0.0);
        assert_eq!(m.vars[m.r(1, 0)].hi, 1.0);
    }

    #[test]
    fn objective_names_round_trip() {
        for o in Objective::ALL {
            assert_eq!(o.name().parse::<Objective>().unwrap(), o);
        }
    }

    #[test]
    fn lp_export_lists_everything() {
        let m = build_model(&two_by_one(), Objective::MaxRevenue).unwrap();
        let text = m.to_lp_string();
        assert!(text.starts_with("\\ pacing"));
        assert!(text.contains("Maximize\n obj: 1 p_0"));
        assert!(text.contains("Binaries\n d_0_0"));
        assert!(text.trim_end().ends_with("End"));
        assert_eq!(text.matches("c11_").count(), 1);
    }
}
