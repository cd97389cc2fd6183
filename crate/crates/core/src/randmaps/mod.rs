//! Random maps with position dependent probabilities, their simulation, and
//! exact feasibility checks for invariance of a prescribed density.

mod audit;
mod cex;
mod report;
mod search;
mod simulate;
mod weights;

pub use audit::{evaluate_bgr_weights, evaluate_constant_weight_claim, ClaimAudit, CONFIRMED, NOT_CONFIRMED};
pub use cex::{
    brute_force_cex_search, derive_cex_equations, tau21, verify_cex_infeasibility, verify_cex_infeasibility_for, CandidateOutcome,
};
pub use report::{CexEquation, FeasibilityReport, Verdict, Witness};
pub use search::{selection_of, two_valued_selection_search, DEFAULT_SEARCH_GRID};
pub use simulate::{simulate_orbit, simulate_orbit_dithered, GENERATOR};
pub use weights::{bgr_probabilities, ProbabilityWeighting, RandomMap};
