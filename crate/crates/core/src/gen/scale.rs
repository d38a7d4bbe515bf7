//! Replicates an instance into many auctions for the dynamics experiments.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::PacingInstance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleConfig {
    /// Number of copies `C` of each good.
    pub factor: usize,
    /// Standard deviation of the value noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledInstance {
    pub instance: PacingInstance,
    /// Original good behind each auction, 0-based: auction `j` has type `j mod m`.
    pub good_types: Vec<usize>,
}

/// Builds `C·m` auctions cycling through the good types, with budgets scaled
/// by `C` and Gaussian noise on every positive value, clamped at zero.
///
/// ```
/// use pacing_core::gen::{fixture, scale_instance, ScaleConfig};
/// let base = fixture("misreporting").unwrap().instance;
/// let s = scale_instance(&base, &ScaleConfig { factor: 3, noise_sigma: 0.0, seed: 0 }).unwrap();
/// assert_eq!(s.good_types, vec![0, 1, 0, 1, 0, 1]);
/// ```
pub fn scale_instance(inst: &PacingInstance, cfg: &ScaleConfig) -> Result<ScaledInstance> {
    if cfg.factor == 0 {
        return Err(Error::InvalidParameter(
            "scale factor must be at least 1".into(),
        ));
    }
    if !(cfg.noise_sigma >= 0.0 && cfg.noise_sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise sigma {} must be finite and >= 0",
            cfg.noise_sigma
        )));
    }
    let (n, m) = (inst.n(), inst.m());
    let total = cfg.factor * m;
    let good_types: Vec<usize> = (0..total).map(|j| j % m).collect();
    let mut rng = super::rng(cfg.seed);
    let noise = (cfg.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, cfg.noise_sigma).expect("sigma validated"));
    let mut values = vec![vec![0.0; total]; n];
    for (i, row) in values.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let base = inst.value(i, good_types[j]);
            *v = match &noise {
                Some(d) if base > 0.0 => (base + d.sample(&mut rng)).max(0.0),
                _ => base,
            };
        }
    }
    let budgets = inst
        .budgets()
        .iter()
        .map(|b| b * cfg.factor as f64)
        .collect();
    Ok(ScaledInstance {
        instance: PacingInstance::new(values, budgets)?,
        good_types,
    })
}
