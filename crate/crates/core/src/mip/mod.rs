//! Mixed-integer formulation of pacing equilibria and its branch-and-bound solver.

pub mod codec;
mod heuristic;
pub mod model;
mod presolve;
pub mod solve;

pub use codec::{decode, encode_outcome, scaled_violation};
pub use model::{build_model, Constraint, Family, MilpModel, Objective, Var};
pub use solve::{
    lp_relax_solve, solve, Backend, EmbeddedBackend, LpRelaxation, MipBackend, SolveResult,
    SolveStats, SolveStatus, SolverConfig,
};

use crate::error::Result;
use crate::market::PacingInstance;

/// Builds and solves in one call.
///
/// ```
/// use pacing_core::gen::fixture;
/// use pacing_core::mip::{solve_instance, Objective, SolverConfig};
/// let inst = fixture("revenue_gap").unwrap().instance;
/// let res = solve_instance(&inst, Objective::MaxRevenue, &SolverConfig::default()).unwrap();
/// assert!((res.objective_value.unwrap() - 102.0).abs() < 1e-6);
/// ```
pub fn solve_instance(
    instance: &PacingInstance,
    objective: Objective,
    config: &SolverConfig,
) -> Result<SolveResult> {
    solve(&build_model(instance, objective)?, config)
}
