//! Step densities, distribution functions, exact invariant densities of
//! piecewise linear Markov maps, and the Ulam approximation.

pub mod cdf;
mod density;
mod ks;
mod linalg;
mod markov;
mod ulam;

pub use cdf::{AffineCell, Curve, CurveSegment, DistributionFunction};
pub use density::PiecewiseConstantDensity;
pub use ks::ks_distance;
pub use markov::{invariant_density, markov_invariant_density, MarkovStructure};
pub use ulam::{ulam_approximation, ulam_stationary, UlamResult};

use crate::error::Result;
use crate::rational::Q;

pub fn cdf_from_density(f: &PiecewiseConstantDensity) -> DistributionFunction {
    DistributionFunction::from_density(f)
}

pub fn invert_cdf(f: &DistributionFunction, u: f64) -> Result<f64> {
    f.invert(u)
}

pub fn convex_combination(f1: &DistributionFunction, f2: &DistributionFunction, lambda: &Q) -> Result<DistributionFunction> {
    DistributionFunction::convex_combination(f1, f2, lambda)
}
