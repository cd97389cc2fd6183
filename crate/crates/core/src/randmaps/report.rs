use serde::{Deserialize, Serialize};

use crate::interval_maps::description::MapDescription;
use crate::interval_maps::Interval;
use crate::rational::{self, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Infeasible,
    Inconclusive,
}

/// One atom of the invariance equation for a two-map random system and the
/// uniform density, written as `p₁(y) = constant + coefficient · p₁(u(y))`
/// for `y` in `y_interval` and `u(y)` in `image_interval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CexEquation {
    pub atom: Interval,
    /// `|τ₁′|` on the lower branch covering the atom, if any.
    #[serde(with = "rational::serde_q::option", default)]
    pub lower_slope: Option<Q>,
    #[serde(with = "rational::serde_q::option", default)]
    pub upper_slope: Option<Q>,
    /// Density left over for the unknown terms after the shared branches.
    #[serde(with = "rational::serde_q")]
    pub remainder: Q,
    #[serde(with = "rational::serde_q")]
    pub constant: Q,
    #[serde(with = "rational::serde_q")]
    pub coefficient: Q,
    pub y_interval: Interval,
    pub image_interval: Interval,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A functional equation no `[0, 1]`-valued function can satisfy.
    FunctionalEquation { equation: Box<CexEquation>, reason: String },
    /// A point where no admissible choice of branches balances the equation.
    Point {
        #[serde(with = "rational::serde_q")]
        x: Q,
        #[serde(with = "rational::serde_q")]
        target: Q,
        /// Reachable sums `Σ f(preimage)/|slope|` for each choice, lowest and highest.
        #[serde(with = "rational::serde_q::vec")]
        reachable: Vec<Q>,
        reason: String,
    },
    /// A found selection.
    Selection { map: MapDescription },
    /// Summary of a randomized candidate search.
    Search { candidates: usize, seed: u64, min_deviation: f64, max_deviation: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub equations: Vec<CexEquation>,
    pub note: String,
}

impl FeasibilityReport {
    pub fn new(verdict: Verdict, witness: Option<Witness>, note: impl Into<String>) -> Self {
        FeasibilityReport { feasible: verdict == Verdict::Feasible, verdict, witness, equations: Vec::new(), note: note.into() }
    }
}
