use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::interval_maps::{Branch, PiecewiseMonotoneMap};
use crate::measures::{markov_invariant_density, AffineCell, DistributionFunction, MarkovStructure, PiecewiseConstantDensity};
use crate::pl::PlFunction;
use crate::rational::{self, qi, to_f64, Q};

use super::{Construction, SelectionResult};

const FIXED_POINT_TOL: f64 = 1e-12;

/// `h(x) = ∫₀ˣ f₂(t) / c(t) dt`, where `c` is the step density `f1` and `F2` the
/// distribution function of `f₂`. `h` must be a homeomorphism fixing every
/// breakpoint of `f1`.
pub fn conjugating_homeomorphism(f2: &DistributionFunction, f1: &PiecewiseConstantDensity) -> Result<DistributionFunction> {
    f2.validate()?;
    let part = f1.breakpoints();
    let c = f1.values();
    if let Some(i) = c.iter().position(|v| !v.is_positive()) {
        return Err(Error::Parameter(format!(
            "plateau value {} on cell {i} is not positive, so 1/c is undefined",
            rational::format_q(&c[i])
        )));
    }
    if let Some(p2) = f2.as_linear() {
        let mut at = vec![Q::zero()];
        for (i, w) in part.windows(2).enumerate() {
            at.push(&at[i] + (p2.eval(&w[1]) - p2.eval(&w[0])) / &c[i]);
        }
        fixes_partition(&at.iter().map(|v| v.to_string()).collect::<Vec<_>>(), &at, part, |a, b| a == b)?;
        let mut xs: Vec<Q> = p2.knots().iter().chain(part.iter()).cloned().collect();
        xs.sort();
        xs.dedup();
        let ys = xs
            .iter()
            .map(|x| {
                let i = part.partition_point(|a| a < x).clamp(1, part.len() - 1) - 1;
                &at[i] + (p2.eval(x) - p2.eval(&part[i])) / &c[i]
            })
            .collect();
        let h = DistributionFunction::linear(PlFunction::new(xs, ys)?)?;
        return require_homeomorphism(h);
    }
    let mut at = vec![0.0];
    for (i, w) in part.windows(2).enumerate() {
        at.push(at[i] + (f2.eval(to_f64(&w[1])) - f2.eval(to_f64(&w[0]))) / to_f64(&c[i]));
    }
    let points: Vec<f64> = part.iter().map(to_f64).collect();
    fixes_partition(&at.iter().map(|v| v.to_string()).collect::<Vec<_>>(), &at, &points, |a, b| (a - b).abs() <= FIXED_POINT_TOL)?;
    let cells = part
        .windows(2)
        .enumerate()
        .map(|(i, w)| AffineCell { lo: to_f64(&w[0]), hi: to_f64(&w[1]), offset: at[i], scale: 1.0 / to_f64(&c[i]) })
        .collect();
    let h = DistributionFunction::Cellwise { base: Box::new(f2.clone()), cells };
    h.validate()?;
    require_homeomorphism(h)
}

fn fixes_partition<T>(shown: &[String], at: &[T], part: &[T], same: impl Fn(&T, &T) -> bool) -> Result<()> {
    let n = part.len() - 1;
    if !same(&at[n], &part[n]) {
        return Err(Error::Inconsistent(format!("h(1) = {} instead of 1", shown[n])));
    }
    for i in 1..n {
        if !same(&at[i], &part[i]) {
            return Err(Error::Inconsistent(format!("h moves the partition point with index {i} to {}", shown[i])));
        }
    }
    Ok(())
}

fn require_homeomorphism(h: DistributionFunction) -> Result<DistributionFunction> {
    if !h.is_strictly_increasing() {
        return Err(Error::Inconsistent("h is not strictly increasing".into()));
    }
    Ok(h)
}

fn restrict(f: &PlFunction, lo: &Q, hi: &Q) -> Result<PlFunction> {
    let mut xs = vec![lo.clone()];
    xs.extend(f.knots().iter().filter(|k| *k > lo && *k < hi).cloned());
    xs.push(hi.clone());
    let ys = xs.iter().map(|x| f.eval(x)).collect();
    PlFunction::new(xs, ys)
}

/// `g⁻¹ ∘ τ ∘ g` for affine `τ` and piecewise linear `g`, exactly.
fn conjugate_exact(tau: &PiecewiseMonotoneMap, g: &PlFunction) -> Result<PiecewiseMonotoneMap> {
    let ginv = g.inverse()?;
    let mut branches = Vec::new();
    for b in tau.branches() {
        let d = b.domain();
        let (lo, hi) = (ginv.eval(&d.lo), ginv.eval(&d.hi));
        let inner = restrict(g, &lo, &hi)?;
        let bpl = PlFunction::new(vec![d.lo.clone(), d.hi.clone()], vec![b.eval_exact(&d.lo).unwrap(), b.eval_exact(&d.hi).unwrap()])?;
        let h = PlFunction::compose(&ginv, &PlFunction::compose(&bpl, &inner)?)?;
        let (xs, ys) = (h.knots(), h.values());
        for k in 0..h.pieces() {
            let slope = (&ys[k + 1] - &ys[k]) / (&xs[k + 1] - &xs[k]);
            let intercept = &ys[k] - &slope * &xs[k];
            branches.push(Branch::affine(xs[k].clone(), xs[k + 1].clone(), slope, intercept)?);
        }
    }
    Ok(PiecewiseMonotoneMap::new(branches)?.merged())
}

/// The selection `g⁻¹ ∘ τ₁ ∘ g` with `g = α·id + (1 − α)·h`, preserving
/// `α f₁ + (1 − α) f₂` where `f₁` is the invariant density of the Markov map
/// `tau1` and `f₂` that of `h⁻¹ ∘ τ₁ ∘ h`.
pub fn construct_conjugacy_selection(tau1: &PiecewiseMonotoneMap, h: &DistributionFunction, alpha: &Q) -> Result<SelectionResult> {
    h.validate()?;
    if !h.is_strictly_increasing() {
        return Err(Error::Parameter("h is not a homeomorphism of [0, 1]".into()));
    }
    let structure = MarkovStructure::discover(tau1)?;
    let f1 = markov_invariant_density(tau1, &structure)?;
    let part = structure.partition();
    for a in part {
        let moved = (h.eval(to_f64(a)) - to_f64(a)).abs();
        if moved > FIXED_POINT_TOL {
            return Err(Error::Parameter(format!(
                "h does not preserve the Markov partition: it moves {} by {moved}",
                rational::format_q(a)
            )));
        }
    }
    let g = DistributionFunction::convex_combination(&DistributionFunction::identity(), h, alpha)?;
    let big_f1 = f1.cdf();
    let (eta, target_cdf) = match g.as_linear() {
        Some(gpl) => {
            let target = PlFunction::compose(&big_f1, &gpl)?;
            (conjugate_exact(tau1, &gpl)?, DistributionFunction::linear(target)?)
        }
        None => {
            let cells = part
                .windows(2)
                .map(|w| AffineCell {
                    lo: to_f64(&w[0]),
                    hi: to_f64(&w[1]),
                    offset: to_f64(&big_f1.eval(&w[0])),
                    scale: to_f64(&f1.eval(&((&w[0] + &w[1]) / qi(2)))),
                })
                .collect();
            let target = DistributionFunction::Cellwise { base: Box::new(g.clone()), cells };
            target.validate()?;
            (tau1.conjugate(&g)?, target)
        }
    };
    let exact = eta.is_affine();
    debug_assert!(alpha.is_positive() && *alpha < Q::one());
    Ok(SelectionResult { eta, target_cdf, construction: Construction::Conjugacy, lambda: alpha.clone(), exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::registry;
    use crate::interval_maps::sup_difference_exact;
    use crate::rational::q;
    use crate::selection::betweenness_check;
    use crate::transfer::check_invariance;

    #[test]
    fn first_example_has_no_partition_preserving_conjugacy() {
        let f1 = registry::get("ex2.1/f1").unwrap().into_density().unwrap();
        let f2 = registry::get("ex2.1/f2").unwrap().into_density().unwrap();
        match conjugating_homeomorphism(&DistributionFunction::from_density(&f2), &f1) {
            Err(Error::Inconsistent(msg)) => assert!(msg.contains("14/9"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn uniform_plateaus_give_the_distribution_function() {
        let phi2 = registry::get_cdf("sec4/phi2").unwrap();
        let h = conjugating_homeomorphism(&phi2, &PiecewiseConstantDensity::uniform()).unwrap();
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            assert!((h.eval(x) - phi2.eval(x)).abs() < 1e-15);
        }
        let id = conjugating_homeomorphism(&DistributionFunction::identity(), &PiecewiseConstantDensity::uniform()).unwrap();
        assert!(id.as_linear().unwrap().same_function(&PlFunction::identity()));
        let zero = PiecewiseConstantDensity::new(vec![qi(0), q(1, 2), qi(1)], vec![qi(2), qi(0)]).unwrap();
        assert!(matches!(conjugating_homeomorphism(&phi2, &zero), Err(Error::Parameter(_))));
    }

    #[test]
    fn identity_conjugacy_returns_the_map() {
        let t = PiecewiseMonotoneMap::tent();
        let r = construct_conjugacy_selection(&t, &DistributionFunction::identity(), &q(1, 3)).unwrap();
        assert!(r.exact);
        assert!(sup_difference_exact(&r.eta, &t).unwrap().is_zero());
    }

    #[test]
    fn tent_and_phi2() {
        let t = PiecewiseMonotoneMap::tent();
        let phi2 = registry::get_cdf("sec4/phi2").unwrap();
        let r = construct_conjugacy_selection(&t, &phi2, &q(1, 2)).unwrap();
        let mix = DistributionFunction::convex_combination(&DistributionFunction::identity(), &phi2, &q(1, 2)).unwrap();
        let inv = check_invariance(&r.eta, &mix, 1 << 12).unwrap();
        assert!(inv.sup_error < 1e-8, "{inv:?}");
        assert!(r.invariance(1 << 12).unwrap().sup_error < 1e-8);
        let upper = registry::get_map("sec4/tau2").unwrap();
        let env = crate::interval_maps::envelope_allowing_crossings(&t, &upper, 1 << 10).unwrap();
        let b = betweenness_check(&r.eta, &env, 2000).unwrap();
        assert!(b.lower_at > 0.85 && b.upper_at > 0.85, "{b:?}");
        for k in 0..=850 {
            let x = k as f64 / 1000.0;
            let e = r.eta.evaluate(x).unwrap();
            assert!(t.evaluate(x).unwrap() <= e + 1e-9 && e <= upper.evaluate(x).unwrap() + 1e-9, "{x}");
        }
    }

    #[test]
    fn partition_must_be_fixed() {
        let t = PiecewiseMonotoneMap::tent();
        let phi1 = registry::get_cdf("sec4/phi1").unwrap();
        assert!(construct_conjugacy_selection(&t, &phi1, &q(1, 2)).is_ok());
        let g = DistributionFunction::linear(PlFunction::new(vec![qi(0), q(1, 2), qi(1)], vec![qi(0), q(1, 4), qi(1)]).unwrap()).unwrap();
        assert!(matches!(construct_conjugacy_selection(&t, &g, &q(1, 2)), Err(Error::Parameter(_))));
    }
}
