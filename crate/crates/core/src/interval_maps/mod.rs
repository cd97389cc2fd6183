//! Piecewise monotone interval maps: branches, evaluation, inversion,
//! refinement, conjugation and envelope validation.

mod branch;
pub mod description;
mod envelope;
mod map;

pub use branch::{Branch, BranchForm, Interval, MonotoneClosure, Monotonicity, IMAGE_TOL};
pub use envelope::{
    envelope_allowing_crossings, validate_envelope, validate_envelope_on, Envelope, OrderViolation, DEFAULT_GRID, ORDER_TOL,
};
pub use map::{common_refinement, sup_difference, sup_difference_exact, PiecewiseMonotoneMap};

pub fn evaluate(map: &PiecewiseMonotoneMap, x: f64) -> crate::Result<f64> {
    map.evaluate(x)
}

pub fn branch_inverse(branch: &Branch, y: f64) -> crate::Result<f64> {
    branch.inverse(y)
}

pub fn extended_inverse(branch: &Branch, x: f64) -> crate::Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(crate::Error::Domain { x, lo: 0.0, hi: 1.0 });
    }
    Ok(branch.extended_inverse(x))
}

pub fn conjugate(map: &PiecewiseMonotoneMap, g: &crate::measures::DistributionFunction) -> crate::Result<PiecewiseMonotoneMap> {
    map.conjugate(g)
}
