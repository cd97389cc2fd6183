use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::examples::registry;
use crate::measures::PiecewiseConstantDensity;
use crate::rational::{self, q, to_f64, Q};
use crate::transfer::{fp_apply_random, InvarianceReport};

use super::{bgr_probabilities, ProbabilityWeighting, RandomMap};

/// Status attached to a stated invariance that exact computation does not reproduce.
pub const NOT_CONFIRMED: &str = "not confirmed by position-dependent transfer operator computation";
pub const CONFIRMED: &str = "confirmed by position-dependent transfer operator computation";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimAudit {
    pub claim: String,
    #[serde(with = "rational::serde_q::vec")]
    pub weights: Vec<Q>,
    /// `P_T 1` computed exactly.
    pub density: PiecewiseConstantDensity,
    #[serde(with = "rational::serde_q")]
    pub mass: Q,
    pub report: InvarianceReport,
    pub status: String,
}

fn audit(claim: &str, weights: ProbabilityWeighting, label: Vec<Q>) -> Result<ClaimAudit> {
    let rm = RandomMap::new(vec![registry::ex21_tau1(), registry::ex21_tau2()], weights)?;
    let uniform = PiecewiseConstantDensity::uniform();
    let density = fp_apply_random(&rm, &uniform)?;
    let (dev, at) = density.sup_distance(&uniform);
    let exact = density.same_density(&uniform);
    let report = InvarianceReport { sup_error: to_f64(&dev), worst_point: to_f64(&at), grid_size: density.breakpoints().len(), exact };
    Ok(ClaimAudit {
        claim: claim.to_string(),
        weights: label,
        mass: density.mass(),
        density,
        report,
        status: if exact { CONFIRMED } else { NOT_CONFIRMED }.to_string(),
    })
}

/// Exact check of the statement that constant weights `(3/4, 1/4)` on the
/// lower and upper maps of the first example leave Lebesgue measure invariant.
pub fn evaluate_constant_weight_claim() -> Result<ClaimAudit> {
    let w = vec![q(3, 4), q(1, 4)];
    audit("constant weights (0.75, 0.25) on the lower and upper maps preserve Lebesgue measure", ProbabilityWeighting::constant(&w)?, w)
}

/// The same check with the weights `a_k f_k / Σ a_j f_j` for `a = (2/5, 3/5)`.
pub fn evaluate_bgr_weights() -> Result<ClaimAudit> {
    let a = vec![q(2, 5), q(3, 5)];
    let f1 = registry::get("ex2.1/f1")?.into_density()?;
    let f2 = registry::get("ex2.1/f2")?.into_density()?;
    audit("weights a_k f_k / (a_1 f_1 + a_2 f_2) with a = (2/5, 3/5) preserve Lebesgue measure", bgr_probabilities(&[f1, f2], &a)?, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn constant_weights_do_not_fix_lebesgue() {
        let a = evaluate_constant_weight_claim().unwrap();
        assert_eq!(a.density.values(), &[q(31, 24), q(17, 24)]);
        assert_eq!(a.density.breakpoints(), &[qi(0), q(1, 2), qi(1)]);
        assert_eq!(a.mass, qi(1));
        assert_eq!(a.status, NOT_CONFIRMED);
        assert!(!a.report.exact);
        // (3/4)(3/2) + (1/4)(2/3)
        assert_eq!(a.density.values()[0], q(3, 4) * q(3, 2) + q(1, 4) * q(2, 3));
    }

    #[test]
    fn bgr_weights_fix_lebesgue() {
        let a = evaluate_bgr_weights().unwrap();
        assert!(a.report.exact);
        assert_eq!(a.report.sup_error, 0.0);
        assert_eq!(a.status, CONFIRMED);
    }
}
