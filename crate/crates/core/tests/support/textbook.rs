//! Dense two-phase tableau simplex with Bland's rule, for `x >= 0` problems.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub cost: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Sense, f64)>,
}

impl Lp {
    pub fn new(vars: usize) -> Self {
        Lp {
            cost: vec![0.0; vars],
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, terms: &[(usize, f64)], sense: Sense, rhs: f64) {
        let mut a = vec![0.0; self.cost.len()];
        for &(k, v) in terms {
            a[k] += v;
        }
        self.rows.push((a, sense, rhs));
    }
}

const EPS: f64 = 1e-9;

struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        for i in 0..self.t.len() {
            if i != r && self.t[i][c].abs() > 0.0 {
                let f = self.t[i][c];
                for k in 0..=self.width {
                    self.t[i][k] -= f * self.t[r][k];
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `obj · x` over the columns allowed to enter. Returns false if unbounded.
    fn run(&mut self, obj: &[f64], allowed: &dyn Fn(usize) -> bool) -> bool {
        for _ in 0..50_000 {
            let reduced = |k: usize| {
                obj[k]
                    - (0..self.basis.len())
                        .map(|i| obj[self.basis[i]] * self.t[i][k])
                        .sum::<f64>()
            };
            let Some(enter) = (0..self.width)
                .find(|&k| allowed(k) && !self.basis.contains(&k) && reduced(k) < -EPS)
            else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.basis.len() {
                let a = self.t[i][enter];
                if a > EPS {
                    let ratio = self.t[i][self.width] / a;
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - EPS
                                || (ratio <= best + EPS && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
        panic!("simplex did not terminate");
    }
}

/// Minimizes `cost · x` subject to the rows and `x >= 0`.
pub fn minimize(lp: &Lp) -> LpResult {
    let n = lp.cost.len();
    let m = lp.rows.len();
    // Column layout: originals, one slack or surplus per inequality, one artificial per row.
    let slack_of: Vec<Option<usize>> = {
        let mut next = n;
        lp.rows
            .iter()
            .map(|(_, s, _)| {
                (*s != Sense::Eq).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let first_art = n + slack_of.iter().flatten().count();
    let width = first_art + m;
    let mut t = vec![vec![0.0; width + 1]; m];
    for (i, (a, sense, b)) in lp.rows.iter().enumerate() {
        let flip = if *b < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            t[i][k] = flip * a[k];
        }
        if let Some(s) = slack_of[i] {
            t[i][s] = flip * if *sense == Sense::Le { 1.0 } else { -1.0 };
        }
        t[i][first_art + i] = 1.0;
        t[i][width] = flip * b;
    }
    let mut tab = Tableau {
        t,
        basis: (first_art..width).collect(),
        width,
    };
    let phase1: Vec<f64> = (0..width)
        .map(|k| if k >= first_art { 1.0 } else { 0.0 })
        .collect();
    tab.run(&phase1, &|_| true);
    let infeas: f64 = (0..m)
        .filter(|&i| tab.basis[i] >= first_art)
        .map(|i| tab.t[i][width])
        .sum();
    if infeas > 1e-7 {
        return LpResult::Infeasible;
    }
    for i in 0..m {
        if tab.basis[i] >= first_art {
            if let Some(c) = (0..first_art).find(|&k| tab.t[i][k].abs() > 1e-7) {
                tab.pivot(i, c);
            }
        }
    }
    let mut phase2 = vec![0.0; width];
    phase2[..n].copy_from_slice(&lp.cost);
    if !tab.run(&phase2, &|k| k < first_art) {
        return LpResult::Unbounded;
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.t[i][width];
        }
    }
    let value = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpResult::Optimal { value, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6.
        let mut lp = Lp::new(2);
        lp.cost = vec![-1.0, -1.0];
        lp.row(&[(0, 1.0), (1, 2.0)], Sense::Le, 4.0);
        lp.row(&[(0, 3.0), (1, 1.0)], Sense::Le, 6.0);
        match minimize(&lp) {
            LpResult::Optimal { value, .. } => assert!((value + 2.8).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
}
