use serde::{Deserialize, Serialize};

use super::instance::PacingInstance;
use crate::error::{Error, Result};

/// Candidate equilibrium: multipliers, fractional allocation and per-unit prices.
///
/// Spends are derived, `s_ij = p_j x_ij`, so they can never disagree with the
/// prices and fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacingOutcome {
    pub alphas: Vec<f64>,
    pub fractions: Vec<Vec<f64>>,
    pub prices: Vec<f64>,
}

impl PacingOutcome {
    pub fn new(alphas: Vec<f64>, fractions: Vec<Vec<f64>>, prices: Vec<f64>) -> Self {
        Self {
            alphas,
            fractions,
            prices,
        }
    }

    /// All-zero allocation and prices with the given multipliers.
    pub fn empty(alphas: Vec<f64>, m: usize) -> Self {
        let n = alphas.len();
        Self {
            alphas,
            fractions: vec![vec![0.0; m]; n],
            prices: vec![0.0; m],
        }
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn m(&self) -> usize {
        self.prices.len()
    }

    pub fn spend(&self, i: usize, j: usize) -> f64 {
        self.prices[j] * self.fractions[i][j]
    }

    pub fn spends(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.m()).map(|j| self.spend(i, j)).collect())
            .collect()
    }

    /// `Σ_j s_ij`.
    pub fn bidder_spend(&self, i: usize) -> f64 {
        (0..self.m()).map(|j| self.spend(i, j)).sum()
    }

    /// Checks shapes against an instance and rejects NaN entries.
    pub fn check_shape(&self, inst: &PacingInstance) -> Result<()> {
        let (n, m) = (inst.n(), inst.m());
        if self.alphas.len() != n || self.fractions.len() != n || self.prices.len() != m {
            return Err(Error::Dimension(format!(
                "outcome is {}x{}, instance is {n}x{m}",
                self.alphas.len(),
                self.prices.len()
            )));
        }
        if let Some(i) = self.fractions.iter().position(|row| row.len() != m) {
            return Err(Error::Dimension(format!(
                "fraction row {i} has wrong length"
            )));
        }
        let has_nan = self
            .alphas
            .iter()
            .chain(&self.prices)
            .chain(self.fractions.iter().flatten())
            .any(|x| x.is_nan());
        if has_nan {
            return Err(Error::NonFinite("NaN in outcome".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outcome serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Revenue, social welfare and paced welfare of an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValues {
    pub revenue: f64,
    pub social_welfare: f64,
    pub paced_welfare: f64,
}

/// Evaluates `Σ s_ij`, `Σ x_ij v_ij` and `Σ x_ij α_i v_ij`.
pub fn objectives(inst: &PacingInstance, out: &PacingOutcome) -> Result<ObjectiveValues> {
    out.check_shape(inst)?;
    let mut vals = ObjectiveValues {
        revenue: 0.0,
        social_welfare: 0.0,
        paced_welfare: 0.0,
    };
    for i in 0..inst.n() {
        for j in 0..inst.m() {
            let x = out.fractions[i][j];
            vals.revenue += out.prices[j] * x;
            vals.social_welfare += x * inst.value(i, j);
            vals.paced_welfare += x * out.alphas[i] * inst.value(i, j);
        }
    }
    Ok(vals)
}

/// Feasibility and tie tolerances shared by the verifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps_feas: f64,
    pub eps_tie: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps_feas: 1e-6,
            eps_tie: 1e-6,
        }
    }
}

impl Tolerance {
    pub fn new(eps_feas: f64, eps_tie: f64) -> Result<Self> {
        if !(eps_feas > 0.0 && eps_tie > 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        Ok(Self { eps_feas, eps_tie })
    }
}
