//! Selections of an envelope `τ₁ ≤ τ₂` that preserve a convex combination of
//! invariant distribution functions.

mod conjugacy;
mod extended;
mod slopes;
mod tentlike;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::interval_maps::{Envelope, PiecewiseMonotoneMap, DEFAULT_GRID};
use crate::measures::DistributionFunction;
use crate::rational::Q;
use crate::transfer::{check_invariance, InvarianceReport};

pub use conjugacy::{conjugating_homeomorphism, construct_conjugacy_selection};
pub use extended::{construct_selection, DEFAULT_RESOLUTION};
pub use slopes::{symmetric_slope_solver, SlopePiece, SymmetricSlopes};
pub use tentlike::{construct_tentlike, construct_tentlike_with, TentLikeAuxiliary};

/// Tolerance for the internal betweenness assertion.
pub const BETWEENNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    MainTheorem,
    TentLike,
    Conjugacy,
    SymmetricSlopes,
}

#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub eta: PiecewiseMonotoneMap,
    pub target_cdf: DistributionFunction,
    pub construction: Construction,
    pub lambda: Q,
    /// All branches affine with rational data.
    pub exact: bool,
}

impl SelectionResult {
    /// Distance between the pushforward of the target and the target.
    pub fn invariance(&self, grid: usize) -> Result<InvarianceReport> {
        check_invariance(&self.eta, &self.target_cdf, grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetweennessReport {
    /// `max (τ₁ − η)₊`.
    pub lower_violation: f64,
    pub lower_at: f64,
    /// `max (η − τ₂)₊`.
    pub upper_violation: f64,
    pub upper_at: f64,
    pub points: usize,
}

impl BetweennessReport {
    pub fn max_violation(&self) -> f64 {
        self.lower_violation.max(self.upper_violation)
    }
}

/// Largest excursions of `eta` outside the envelope on `grid + 1` points plus
/// all breakpoints, where both one-sided values are compared.
pub fn betweenness_check(eta: &PiecewiseMonotoneMap, env: &Envelope, grid: usize) -> Result<BetweennessReport> {
    let mut xs: Vec<f64> = (0..=grid.max(1)).map(|k| k as f64 / grid.max(1) as f64).collect();
    let mut knots: Vec<f64> = eta.breakpoints_f64().to_vec();
    knots.extend_from_slice(env.tau1().breakpoints_f64());
    knots.extend_from_slice(env.tau2().breakpoints_f64());
    xs.extend(knots.iter().copied());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut r = BetweennessReport { lower_violation: 0.0, lower_at: 0.0, upper_violation: 0.0, upper_at: 0.0, points: 0 };
    let mut visit = |x: f64, e: f64, lo: f64, hi: f64| {
        r.points += 1;
        if lo - e > r.lower_violation {
            r.lower_violation = lo - e;
            r.lower_at = x;
        }
        if e - hi > r.upper_violation {
            r.upper_violation = e - hi;
            r.upper_at = x;
        }
    };
    for &x in &xs {
        visit(x, eta.evaluate(x)?, env.tau1().evaluate(x)?, env.tau2().evaluate(x)?);
        if knots.binary_search_by(|k| k.total_cmp(&x)).is_ok() {
            visit(x, eta.evaluate_right(x)?, env.tau1().evaluate_right(x)?, env.tau2().evaluate_right(x)?);
        }
    }
    Ok(r)
}

/// Runs [`betweenness_check`] on the default grid when the envelope is ordered.
pub(crate) fn assert_between(eta: &PiecewiseMonotoneMap, env: &Envelope) -> Result<()> {
    if env.crossing().is_some() {
        return Ok(());
    }
    let r = betweenness_check(eta, env, DEFAULT_GRID)?;
    if r.max_violation() > BETWEENNESS_TOL {
        return Err(crate::Error::Assertion(format!(
            "selection leaves the envelope: lower {} at {}, upper {} at {}",
            r.lower_violation, r.lower_at, r.upper_violation, r.upper_at
        )));
    }
    Ok(())
}
