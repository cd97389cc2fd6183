use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval_maps::{Branch, PiecewiseMonotoneMap};
use crate::measures::{DistributionFunction, PiecewiseConstantDensity};
use crate::rational::{self, q, qi, Q};
use crate::transfer::fp_apply;

use super::{Construction, SelectionResult};

/// One affine piece of the solved map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopePiece {
    #[serde(with = "rational::serde_q")]
    pub lo: Q,
    #[serde(with = "rational::serde_q")]
    pub hi: Q,
    /// Signed slope.
    #[serde(with = "rational::serde_q")]
    pub slope: Q,
}

#[derive(Debug, Clone)]
pub struct SymmetricSlopes {
    /// The pieces on `[0, 1]`, left to right.
    pub profile: Vec<SlopePiece>,
    /// Slope magnitudes on the four pieces of `[0, 1/2]`.
    pub magnitudes: Vec<Q>,
    /// `(1 − λ)` on `[0, 1/4] ∪ [3/4, 1]`, `(1 + λ)` on `[1/4, 3/4]`.
    pub target: PiecewiseConstantDensity,
    pub selection: SelectionResult,
}

/// The symmetric unimodal map with slope magnitudes `2, 2(1−λ)/(1+λ), 2,
/// 2(1+λ)/(1−λ)` on `[0, 1/2]` that preserves the target density for `λ`.
pub fn symmetric_slope_solver(lambda: &Q) -> Result<SymmetricSlopes> {
    if !lambda.is_positive() || *lambda >= Q::one() {
        return Err(Error::Parameter(format!("λ = {} must lie in (0, 1)", rational::format_q(lambda))));
    }
    let one = Q::one();
    let two = qi(2);
    let s = [two.clone(), &two * (&one - lambda) / (&one + lambda), two.clone(), &two * (&one + lambda) / (&one - lambda)];
    let quarter = q(1, 4);
    let at_quarter = &quarter + &s[1] / qi(8);
    let p3 = &quarter + (q(3, 4) - &at_quarter) / &s[2];
    let knots = [qi(0), q(1, 8), quarter, p3, q(1, 2)];
    let mut values = vec![Q::zero()];
    for (i, w) in knots.windows(2).enumerate() {
        values.push(&values[i] + &s[i] * (&w[1] - &w[0]));
    }
    if values[4] != one || values[2] != at_quarter {
        return Err(Error::Assertion(format!("assembled slopes reach {} at 1/2 instead of 1", rational::format_q(&values[4]))));
    }
    let mut profile = Vec::with_capacity(8);
    let mut branches = Vec::with_capacity(8);
    for i in 0..4 {
        let intercept = &values[i] - &s[i] * &knots[i];
        profile.push(SlopePiece { lo: knots[i].clone(), hi: knots[i + 1].clone(), slope: s[i].clone() });
        branches.push(Branch::affine(knots[i].clone(), knots[i + 1].clone(), s[i].clone(), intercept)?);
    }
    for i in (0..4).rev() {
        let (lo, hi) = (&one - &knots[i + 1], &one - &knots[i]);
        let slope = -s[i].clone();
        let intercept = &values[i] - &slope * &hi;
        profile.push(SlopePiece { lo: lo.clone(), hi: hi.clone(), slope: slope.clone() });
        branches.push(Branch::affine(lo, hi, slope, intercept)?);
    }
    let eta = PiecewiseMonotoneMap::new(branches)?;
    let target = PiecewiseConstantDensity::new(vec![qi(0), q(1, 4), q(3, 4), qi(1)], vec![&one - lambda, &one + lambda, &one - lambda])?;
    if !fp_apply(&eta, &target)?.same_density(&target) {
        return Err(Error::Assertion("solved map does not preserve its target".into()));
    }
    let selection = SelectionResult {
        eta,
        target_cdf: DistributionFunction::from_density(&target),
        construction: Construction::SymmetricSlopes,
        lambda: lambda.clone(),
        exact: true,
    };
    Ok(SymmetricSlopes { profile, magnitudes: s.to_vec(), target, selection })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stated_slopes() {
        let a = symmetric_slope_solver(&q(1, 2)).unwrap();
        assert_eq!(a.magnitudes, vec![qi(2), q(2, 3), qi(2), qi(6)]);
        let b = symmetric_slope_solver(&q(1, 10)).unwrap();
        assert_eq!(b.magnitudes, vec![qi(2), q(18, 11), qi(2), q(22, 9)]);
        assert_eq!(b.profile[3].lo, q(35, 88));
    }

    #[test]
    fn map_is_symmetric_and_unimodal() {
        let r = symmetric_slope_solver(&q(1, 2)).unwrap();
        let m = &r.selection.eta;
        assert!(m.is_continuous(0.0));
        assert_eq!(m.evaluate_exact(&qi(0)).unwrap(), qi(0));
        assert_eq!(m.evaluate_exact(&q(1, 2)).unwrap(), qi(1));
        assert_eq!(m.evaluate_exact(&qi(1)).unwrap(), qi(0));
        for k in 0..=40 {
            let x = q(k, 80);
            assert_eq!(m.evaluate_exact(&x).unwrap(), m.evaluate_exact(&(qi(1) - &x)).unwrap());
        }
        assert_eq!(r.profile.iter().map(|p| p.slope.abs()).collect::<Vec<_>>()[4..], [qi(6), qi(2), q(2, 3), qi(2)]);
    }

    #[test]
    fn small_lambda_approaches_the_tent() {
        let r = symmetric_slope_solver(&q(1, 1000)).unwrap();
        let d = crate::interval_maps::sup_difference_exact(&r.selection.eta, &PiecewiseMonotoneMap::tent()).unwrap();
        assert!(d < q(1, 500));
        assert!(symmetric_slope_solver(&qi(1)).is_err());
    }
}
