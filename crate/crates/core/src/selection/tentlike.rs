use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interval_maps::{Branch, Envelope, MonotoneClosure, Monotonicity, PiecewiseMonotoneMap};
use crate::measures::DistributionFunction;
use crate::rational::{qi, to_f64, Q};

use super::extended::{bracketed_root, combined_cdf, inverse_closure_branch, Psi, DEFAULT_RESOLUTION};
use super::{assert_between, Construction, SelectionResult};

const ENDPOINT_TOL: f64 = 1e-12;

/// The functions behind a tent-like selection: `s` relates the two branches by
/// `η₂ = η₁ ∘ s⁻¹`, and `eta1_inverse` is the inverse of the rising branch.
#[derive(Clone)]
pub struct TentLikeAuxiliary {
    pub peak: Q,
    /// Maps `[0, peak]` onto `[peak, 1]`, decreasing.
    pub s: MonotoneClosure,
    /// Maps `[0, 1]` onto `[0, peak]`, increasing.
    pub eta1_inverse: MonotoneClosure,
}

impl fmt::Debug for TentLikeAuxiliary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TentLikeAuxiliary").field("peak", &self.peak).finish_non_exhaustive()
    }
}

/// Inverse of one monotone side made of consecutive branches.
fn side_inverse(branches: Vec<Branch>) -> impl Fn(f64) -> f64 + Send + Sync {
    move |x: f64| {
        let b = branches
            .iter()
            .find(|b| {
                let (lo, hi) = b.image();
                x >= lo && x <= hi
            })
            .unwrap_or(&branches[0]);
        b.extended_inverse(x)
    }
}

fn split_sides(map: &PiecewiseMonotoneMap) -> Result<(Vec<Branch>, Vec<Branch>, Q)> {
    let pattern = map.monotonicity_pattern();
    let k = pattern.iter().position(|m| *m == Monotonicity::Decreasing).unwrap_or(pattern.len());
    if k == 0 || k == pattern.len() || pattern[k..].contains(&Monotonicity::Increasing) {
        return Err(Error::Construction("tent-like construction needs an increasing then decreasing envelope".into()));
    }
    let b = map.branches();
    Ok((b[..k].to_vec(), b[k..].to_vec(), map.breakpoints()[k].clone()))
}

fn check_unimodal(map: &PiecewiseMonotoneMap, peak: &Q) -> Result<()> {
    let p = to_f64(peak);
    let checks = [(0.0, map.evaluate(0.0)?, 0.0), (p, map.evaluate(p)?, 1.0), (1.0, map.evaluate(1.0)?, 0.0)];
    for (x, got, want) in checks {
        if (got - want).abs() > ENDPOINT_TOL {
            return Err(Error::Construction(format!("tent-like construction needs value {want} at {x}, got {got}")));
        }
    }
    if !map.is_continuous(ENDPOINT_TOL) {
        return Err(Error::Construction("tent-like construction needs continuous maps".into()));
    }
    Ok(())
}

/// The selection of a unimodal envelope built from its rising branch `η₁`,
/// with `η₁⁻¹ = F⁻¹(λ F1 ∘ τ₁,₁⁻¹ + (1 − λ) F2 ∘ τ₂,₁⁻¹)` and `η₂ = η₁ ∘ s⁻¹`,
/// `s(z) = F⁻¹(1 + F(z) − F(η₁(z)))`.
pub fn construct_tentlike(
    env: &Envelope,
    f1: &DistributionFunction,
    f2: &DistributionFunction,
    lambda: &Q,
) -> Result<(SelectionResult, TentLikeAuxiliary)> {
    construct_tentlike_with(env, f1, f2, lambda, DEFAULT_RESOLUTION)
}

/// [`construct_tentlike`] with `resolution` table cells per branch.
pub fn construct_tentlike_with(
    env: &Envelope,
    f1: &DistributionFunction,
    f2: &DistributionFunction,
    lambda: &Q,
    resolution: usize,
) -> Result<(SelectionResult, TentLikeAuxiliary)> {
    let (up1, _, peak) = split_sides(env.tau1())?;
    let (up2, _, peak2) = split_sides(env.tau2())?;
    if peak != peak2 {
        return Err(Error::Construction("both maps must turn at the same point".into()));
    }
    check_unimodal(env.tau1(), &peak)?;
    check_unimodal(env.tau2(), &peak)?;
    let f = Arc::new(combined_cdf(f1, f2, lambda)?);
    let l = to_f64(lambda);
    let p = to_f64(&peak);

    let (inv1, inv2) = (side_inverse(up1), side_inverse(up2));
    let (g1, g2, ff) = (f1.clone(), f2.clone(), f.clone());
    let eta1_inv: Psi = Arc::new(move |x: f64| {
        let u = l * g1.eval(inv1(x)) + (1.0 - l) * g2.eval(inv2(x));
        ff.invert_unchecked(u.clamp(0.0, 1.0)).clamp(0.0, p)
    });
    let (e1, ff) = (eta1_inv.clone(), f.clone());
    let eta2_inv: Psi = Arc::new(move |w: f64| {
        let u = 1.0 + ff.eval(e1(w)) - ff.eval(w);
        ff.invert_unchecked(u.clamp(0.0, 1.0)).clamp(p, 1.0)
    });

    let eta1 =
        inverse_closure_branch(eta1_inv.clone(), (0.0, 1.0), qi(0), peak.clone(), resolution, Monotonicity::Increasing, "eta1".into())?;
    let eta2 = inverse_closure_branch(eta2_inv, (0.0, 1.0), peak.clone(), qi(1), resolution, Monotonicity::Decreasing, "eta2".into())?;

    let (b1, ff) = (eta1.clone(), f.clone());
    let s = MonotoneClosure::new(
        "s",
        0.0,
        p,
        move |z: f64| ff.invert_unchecked((1.0 + ff.eval(z) - ff.eval(b1.eval(z))).clamp(0.0, 1.0)),
        None,
        1e-12,
    );
    let e = eta1_inv.clone();
    let eta1_inverse = MonotoneClosure::new(
        "eta1_inverse",
        0.0,
        1.0,
        move |x: f64| e(x),
        Some(Arc::new(move |z: f64| bracketed_root(|x| eta1_inv(x), z, 0.0, 1.0))),
        1e-12,
    );

    let eta = PiecewiseMonotoneMap::new(vec![eta1, eta2])?;
    assert_between(&eta, env)?;
    let result =
        SelectionResult { eta, target_cdf: (*f).clone(), construction: Construction::TentLike, lambda: lambda.clone(), exact: false };
    Ok((result, TentLikeAuxiliary { peak, s, eta1_inverse }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::envelope;
    use crate::interval_maps::{sup_difference, validate_envelope};
    use crate::rational::q;
    use crate::selection::construct_selection;

    #[test]
    fn tent_gives_tent_and_reflection() {
        let t = PiecewiseMonotoneMap::tent();
        let env = validate_envelope(&t, &t).unwrap();
        let id = DistributionFunction::identity();
        let (r, aux) = construct_tentlike_with(&env, &id, &id, &q(1, 4), 256).unwrap();
        assert!(sup_difference(&r.eta, &t, 1000).unwrap().0 < 1e-10);
        for k in 0..=50 {
            let z = 0.5 * k as f64 / 50.0;
            assert!((aux.s.eval(z) - (1.0 - z)).abs() < 1e-10);
        }
        assert_eq!(aux.eta1_inverse.eval(0.0), 0.0);
        assert!((aux.eta1_inverse.eval(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_the_main_construction() {
        let ex = envelope("sec4").unwrap();
        let lambda = q(3, 4);
        let main = construct_selection(&ex.envelope, &ex.f1, &ex.f2, &lambda, 1 << 10).unwrap();
        let (tl, aux) = construct_tentlike_with(&ex.envelope, &ex.f1, &ex.f2, &lambda, 1 << 10).unwrap();
        assert!(sup_difference(&main.eta, &tl.eta, 2000).unwrap().0 < 1e-8);
        assert!((aux.s.eval(0.0) - 1.0).abs() < 1e-12);
        assert!((aux.s.eval(0.5) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_unimodal_envelopes() {
        let ex = envelope("sec6").unwrap();
        assert!(matches!(construct_tentlike(&ex.envelope, &ex.f1, &ex.f2, &q(1, 2)), Err(Error::Construction(_))));
    }
}
