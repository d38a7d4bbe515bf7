//! Seeded instance generators.
//!
//! All randomness comes from [`rng`], a `ChaCha8` stream seeded with a `u64`,
//! so a configuration and seed pin down an instance on every platform.

pub mod calibrate;
pub mod cluster;
pub mod fixtures;
pub mod gadget;
pub mod sat;
pub mod scale;
pub mod stylized;

pub use calibrate::{calibrate_budgets, Calibration};
pub use cluster::{compress_by_clustering, Clustering};
pub use fixtures::{all_fixtures, fixture, fixture_names, Fixture};
pub use gadget::{gen_gadget, GadgetParams};
pub use sat::{brute_force_sat, gen_3sat_revenue, parse_dimacs, random_3cnf, Cnf, SatReduction};
pub use scale::{scale_instance, ScaleConfig, ScaledInstance};
pub use stylized::{gen_stylized, GenConfig, InstanceKind};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere a seed appears.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
