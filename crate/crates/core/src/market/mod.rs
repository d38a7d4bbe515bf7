//! Pacing games: instances, outcomes, equilibrium verification, best
//! responses, competitive equilibria and the smoothed game.

pub mod best_response;
pub mod competitive;
pub mod instance;
pub mod outcome;
pub mod pareto;
pub mod smoothed;
pub mod verify;

pub use best_response::{
    best_response, best_response_with, evaluate_response, rival_top_bids, BestResponse,
    ResponseEval, TieBreak,
};
pub use competitive::{
    ce_to_pacing, demand_utility, pe_to_ce, verify_competitive, CeToPacing, CompetitiveOutcome,
};
pub use instance::PacingInstance;
pub use outcome::{objectives, ObjectiveValues, PacingOutcome, Tolerance};
pub use pareto::{pareto_probe, Dominating, ProbeConfig, ProbeVerdict};
pub use smoothed::{smoothed_outcome, SmoothedGameParams, SmoothedOutcome};
pub use verify::{verify_equilibrium, Condition, Verdict, Violation, ViolationCode};
