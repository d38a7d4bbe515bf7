//! 3-CNF formulas and their reduction to revenue maximization.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gadget::GadgetParams;
use crate::error::{Error, Result};
use crate::market::PacingInstance;

/// A CNF formula with DIMACS literals: `+v` / `-v` for variable `v` in `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    /// Checks that every clause has exactly three in-range, non-zero literals.
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for (c, clause) in clauses.iter().enumerate() {
            if clause.len() != 3 {
                return Err(Error::InvalidInstance(format!(
                    "clause {c} has {} literals",
                    clause.len()
                )));
            }
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(Error::InvalidInstance(format!(
                        "clause {c} has bad literal {lit}"
                    )));
                }
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&lit| {
                let v = assignment[lit.unsigned_abs() as usize - 1];
                if lit > 0 {
                    v
                } else {
                    !v
                }
            })
        })
    }
}

/// Parses DIMACS CNF text. Only 3-literal clauses are accepted.
pub fn parse_dimacs(text: &str) -> Result<Cnf> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "cnf" {
                return Err(Error::InvalidInstance(format!("bad header `{line}`")));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::InvalidInstance(format!("bad header `{line}`")))
            };
            header = Some((parse(parts[1])?, parse(parts[2])?));
            continue;
        }
        for tok in line.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| Error::InvalidInstance(format!("bad literal `{tok}`")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let (vars, count) =
        header.ok_or_else(|| Error::InvalidInstance("missing `p cnf` header".into()))?;
    if count != clauses.len() {
        return Err(Error::InvalidInstance(format!(
            "header declares {count} clauses, found {}",
            clauses.len()
        )));
    }
    Cnf::new(vars, clauses)
}

/// Random formula: each clause draws three variables (distinct when possible)
/// and independent signs.
pub fn random_3cnf(num_vars: usize, num_clauses: usize, seed: u64) -> Result<Cnf> {
    if num_vars == 0 {
        return Err(Error::InvalidParameter(
            "formula needs at least one variable".into(),
        ));
    }
    let mut rng = super::rng(seed);
    let mut clauses = Vec::with_capacity(num_clauses);
    for _ in 0..num_clauses {
        let mut vars: Vec<usize> = Vec::with_capacity(3);
        while vars.len() < 3 {
            let v = rng.random_range(1..=num_vars);
            if num_vars < 3 || !vars.contains(&v) {
                vars.push(v);
            }
        }
        clauses.push(
            vars.iter()
                .map(|&v| {
                    if rng.random_bool(0.5) {
                        v as i32
                    } else {
                        -(v as i32)
                    }
                })
                .collect(),
        );
    }
    Cnf::new(num_vars, clauses)
}

/// Exhaustive satisfiability check; returns a satisfying assignment if any.
pub fn brute_force_sat(cnf: &Cnf) -> Option<Vec<bool>> {
    assert!(
        cnf.num_vars < 32,
        "brute force limited to fewer than 32 variables"
    );
    (0u32..1 << cnf.num_vars).find_map(|mask| {
        let a: Vec<bool> = (0..cnf.num_vars).map(|v| mask >> v & 1 == 1).collect();
        cnf.satisfied_by(&a).then_some(a)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatReduction {
    pub instance: PacingInstance,
    /// Revenue reachable in equilibrium iff the formula is satisfiable.
    pub threshold: f64,
}

/// Revenue reduction from 3-SAT.
///
/// Variable `v` (0-based) owns bidders `2v` (positive literal) and `2v + 1`
/// (negative literal) and items `4v..4v + 4`, which form a gadget with
/// `K1 = 4`, `alpha = 1/4`, `delta = 0`. Clause `c` is item `4|V| + c`, valued
/// 1 by the bidders of its literals and 2 by a final unlimited bidder.
/// Both gadget budgets are spent in every equilibrium of a gadget, so the
/// variable items earn `8|V|` and the threshold is `|C| + 8|V|`.
pub fn gen_3sat_revenue(cnf: &Cnf) -> Result<SatReduction> {
    let cnf = Cnf::new(cnf.num_vars, cnf.clauses.clone())?;
    let nv = cnf.num_vars;
    let nc = cnf.clauses.len();
    let gadget = GadgetParams::new(4.0, 0.25, 0.0)?;
    let rows = gadget.values();
    let m = 4 * nv + nc;
    let n = 2 * nv + 1;
    let mut values = vec![vec![0.0; m]; n];
    for v in 0..nv {
        for side in 0..2 {
            values[2 * v + side][4 * v..4 * v + 4].copy_from_slice(&rows[side]);
        }
    }
    for (c, clause) in cnf.clauses.iter().enumerate() {
        let item = 4 * nv + c;
        for &lit in clause {
            let v = lit.unsigned_abs() as usize - 1;
            let bidder = if lit > 0 { 2 * v } else { 2 * v + 1 };
            values[bidder][item] = 1.0;
        }
        values[n - 1][item] = 2.0;
    }
    let mut budgets = vec![gadget.k1; n];
    budgets[n - 1] = f64::INFINITY;
    let threshold = nc as f64 + 2.0 * gadget.k1 * nv as f64;
    Ok(SatReduction {
        instance: PacingInstance::new(values, budgets)?,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dimacs() {
        let text = "c example\np cnf 3 2\n1 -2 3 0\n-1 2 3 0\n";
        let cnf = parse_dimacs(text).unwrap();
        assert_eq!(cnf.num_vars, 3);
        assert_eq!(cnf.clauses, vec![vec![1, -2, 3], vec![-1, 2, 3]]);
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_dimacs("p cnf 2 1\n1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 2 5 0\n").is_err());
        assert!(parse_dimacs("1 2 3 0\n").is_err());
        assert!(parse_dimacs("p cnf 3 2\n1 2 3 0\n").is_err());
    }

    #[test]
    fn brute_force_small() {
        let sat = Cnf::new(1, vec![vec![1, 1, 1]]).unwrap();
        assert_eq!(brute_force_sat(&sat), Some(vec![true]));
        let unsat = Cnf::new(1, vec![vec![1, 1, 1], vec![-1, -1, -1]]).unwrap();
        assert_eq!(brute_force_sat(&unsat), None);
    }

    #[test]
    fn reduction_shape() {
        let cnf = Cnf::new(2, vec![vec![1, -2, 2], vec![-1, -1, 2]]).unwrap();
        let red = gen_3sat_revenue(&cnf).unwrap();
        assert_eq!(red.instance.n(), 5);
        assert_eq!(red.instance.m(), 10);
        assert_eq!(red.threshold, 2.0 + 16.0);
        assert!(red.instance.is_unlimited(4));
        // Literal -2 occurs in clause 0, so bidder 3 values item 8.
        assert_eq!(red.instance.value(3, 8), 1.0);
        assert_eq!(red.instance.value(0, 9), 0.0);
        assert_eq!(red.instance.value(1, 9), 1.0);
    }

    #[test]
    fn random_formulas_are_well_formed() {
        for seed in 0..20 {
            let f = random_3cnf(4, 5, seed).unwrap();
            assert_eq!(f.clauses.len(), 5);
            for c in &f.clauses {
                let mut v: Vec<u32> = c.iter().map(|l| l.unsigned_abs()).collect();
                v.sort_unstable();
                v.dedup();
                assert_eq!(v.len(), 3);
            }
        }
    }
}
