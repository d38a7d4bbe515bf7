//! Two-bidder gadget whose equilibria encode a binary choice.
//!
//! In one equilibrium bidder 1 keeps multiplier 1 and bidder 2 paces down to
//! `alpha`; the mirror image is the other. When `alpha + delta < 1/3` no
//! equilibrium has both multipliers at least `3 alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{PacingInstance, PacingOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GadgetParams {
    pub k1: f64,
    pub alpha: f64,
    pub delta: f64,
    /// Premium on the contested items; defaults to `1e-3 * k1`.
    pub epsilon: f64,
}

impl GadgetParams {
    pub fn new(k1: f64, alpha: f64, delta: f64) -> Result<Self> {
        let p = Self {
            k1,
            alpha,
            delta,
            epsilon: 1e-3 * k1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn k2(&self) -> f64 {
        (1.0 - self.alpha - self.delta) / (2.0 * self.alpha) * self.k1
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.k1 > 0.0
            && self.alpha > 0.0
            && self.alpha < 1.0
            && self.delta >= 0.0
            && self.alpha + self.delta < 1.0
            && self.epsilon > 0.0
            && self.k1.is_finite()
            && self.epsilon.is_finite();
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "invalid gadget parameters {self:?}"
            )));
        }
        Ok(())
    }

    /// Value rows of the two bidders.
    pub fn values(&self) -> [[f64; 4]; 2] {
        let (k1, k2) = (self.k1, self.k2());
        let top = k1 / self.alpha + self.epsilon;
        [[k2, k2, top, k1], [k2, k2, k1, top]]
    }

    /// The equilibrium in which bidder `keeper` bids truthfully and the other
    /// paces to `alpha`.
    pub fn equilibrium(&self, keeper: usize) -> PacingOutcome {
        let (k1, k2, a) = (self.k1, self.k2(), self.alpha);
        let mut alphas = vec![a, a];
        alphas[keeper] = 1.0;
        let other = 1 - keeper;
        let mut fractions = vec![vec![0.0; 4]; 2];
        let own_item = 2 + keeper;
        let contested = 2 + other;
        fractions[keeper][0] = 1.0;
        fractions[keeper][1] = 1.0;
        fractions[keeper][own_item] = 1.0;
        fractions[other][contested] = 1.0;
        let mut prices = vec![a * k2, a * k2, 0.0, 0.0];
        prices[own_item] = a * k1;
        prices[contested] = k1;
        PacingOutcome::new(alphas, fractions, prices)
    }
}

/// Builds the gadget instance: two bidders, four items, budgets `k1`.
///
/// ```
/// use pacing_core::gen::{gen_gadget, GadgetParams};
/// let p = GadgetParams::new(4.0, 0.25, 0.0).unwrap();
/// assert_eq!(p.k2(), 6.0);
/// assert_eq!(gen_gadget(&p).unwrap().m(), 4);
/// ```
pub fn gen_gadget(params: &GadgetParams) -> Result<PacingInstance> {
    params.validate()?;
    let rows = params.values();
    PacingInstance::new(
        rows.iter().map(|r| r.to_vec()).collect(),
        vec![params.k1; 2],
    )
}
