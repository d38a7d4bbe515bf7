//! Random complete, sampled and correlated instances.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::PacingInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    /// Every bidder values every good, `v ~ U[0, 1]`.
    Complete,
    /// Each bidder is interested in each good with probability 1/2.
    Sampled,
    /// Values scatter around a per-good mean with standard deviation `sigma`.
    Correlated,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 3] = [
        InstanceKind::Complete,
        InstanceKind::Sampled,
        InstanceKind::Correlated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Complete => "complete",
            InstanceKind::Sampled => "sampled",
            InstanceKind::Correlated => "correlated",
        }
    }
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(InstanceKind::Complete),
            "sampled" => Ok(InstanceKind::Sampled),
            "correlated" => Ok(InstanceKind::Correlated),
            other => Err(Error::InvalidParameter(format!(
                "unknown instance kind `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub kind: InstanceKind,
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub sigma: f64,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(kind: InstanceKind, n: usize, m: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            m,
            sigma: 0.0,
            seed,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidParameter("n and m must be at least 1".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma = {} must be finite and >= 0",
                self.sigma
            )));
        }
        Ok(())
    }
}

const TRUNCATION_RETRIES: usize = 100;

/// Draws from `N(mean, sigma)` restricted to `[0, 1]` by rejection, clamping
/// after the retry budget runs out.
fn truncated_normal<R: Rng>(rng: &mut R, mean: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return mean.clamp(0.0, 1.0);
    }
    let normal = Normal::new(mean, sigma).expect("sigma is finite and positive");
    let mut draw = mean;
    for _ in 0..TRUNCATION_RETRIES {
        draw = normal.sample(rng);
        if (0.0..=1.0).contains(&draw) {
            return draw;
        }
    }
    draw.clamp(0.0, 1.0)
}

/// Generates an instance of the configured family.
///
/// Budgets are `U(0, Σ_j v_ij / n]`, drawn as `(1 − u) Σ_j v_ij / n` so they
/// stay positive.
///
/// ```
/// use pacing_core::gen::{gen_stylized, GenConfig, InstanceKind};
/// let cfg = GenConfig::new(InstanceKind::Complete, 4, 6, 7);
/// assert_eq!(gen_stylized(&cfg).unwrap(), gen_stylized(&cfg).unwrap());
/// ```
pub fn gen_stylized(cfg: &GenConfig) -> Result<PacingInstance> {
    cfg.validate()?;
    let (n, m) = (cfg.n, cfg.m);
    let mut rng = super::rng(cfg.seed);
    let mut values = vec![vec![0.0; m]; n];
    match cfg.kind {
        InstanceKind::Complete => {
            for row in values.iter_mut() {
                for v in row.iter_mut() {
                    *v = rng.random::<f64>();
                }
            }
        }
        InstanceKind::Sampled => {
            let mut interested = vec![vec![false; m]; n];
            for row in interested.iter_mut() {
                for cell in row.iter_mut() {
                    *cell = rng.random_bool(0.5);
                }
            }
            for row in interested.iter_mut() {
                if !row.iter().any(|&b| b) {
                    row[rng.random_range(0..m)] = true;
                }
            }
            for i in 0..n {
                for j in 0..m {
                    if interested[i][j] {
                        values[i][j] = rng.random::<f64>();
                    }
                }
            }
        }
        InstanceKind::Correlated => {
            let means: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            for row in values.iter_mut() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = truncated_normal(&mut rng, means[j], cfg.sigma);
                }
            }
        }
    }
    let budgets = values
        .iter()
        .map(|row| {
            let cap = row.iter().sum::<f64>() / n as f64;
            let b = (1.0 - rng.random::<f64>()) * cap;
            if b > 0.0 {
                b
            } else {
                f64::MIN_POSITIVE
            }
        })
        .collect();
    PacingInstance::new(values, budgets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_ranges() {
        for seed in 0..50 {
            let inst = gen_stylized(&GenConfig::new(InstanceKind::Complete, 1, 1, seed)).unwrap();
            let v = inst.value(0, 0);
            assert!((0.0..=1.0).contains(&v));
            assert!(inst.budget(0) > 0.0 && inst.budget(0) <= v);
        }
    }

    #[test]
    fn zero_sigma_collapses_columns() {
        let cfg = GenConfig::new(InstanceKind::Correlated, 5, 4, 3).with_sigma(0.0);
        let inst = gen_stylized(&cfg).unwrap();
        for j in 0..4 {
            assert!((1..5).all(|i| inst.value(i, j) == inst.value(0, j)));
        }
    }

    #[test]
    fn sampled_bidders_want_something() {
        for seed in 0..50 {
            let inst = gen_stylized(&GenConfig::new(InstanceKind::Sampled, 6, 2, seed)).unwrap();
            assert!(inst.values().iter().all(|row| row.iter().any(|&v| v > 0.0)));
        }
    }

    #[test]
    fn seeds_differ() {
        let a = gen_stylized(&GenConfig::new(InstanceKind::Complete, 3, 3, 1)).unwrap();
        let b = gen_stylized(&GenConfig::new(InstanceKind::Complete, 3, 3, 2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(gen_stylized(&GenConfig::new(InstanceKind::Complete, 0, 3, 1)).is_err());
        assert!(
            gen_stylized(&GenConfig::new(InstanceKind::Correlated, 2, 3, 1).with_sigma(-1.0))
                .is_err()
        );
    }
}
