use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interval_maps::{Branch, BranchForm, Envelope, Interval, MonotoneClosure, Monotonicity, PiecewiseMonotoneMap};
use crate::measures::DistributionFunction;
use crate::pl::PlFunction;
use crate::rational::{from_f64, qi, to_f64, Q};

use super::{assert_between, Construction, SelectionResult};

/// Default number of table points per branch of the constructed selection.
pub const DEFAULT_RESOLUTION: usize = 1 << 14;
pub(crate) const MIN_RESOLUTION: usize = 16;
const ROOT_MAX_ITER: usize = 200;

/// `λ F1 + (1 − λ) F2`, which must be a homeomorphism of `[0, 1]`.
pub(crate) fn combined_cdf(f1: &DistributionFunction, f2: &DistributionFunction, lambda: &Q) -> Result<DistributionFunction> {
    f1.validate()?;
    f2.validate()?;
    let f = DistributionFunction::convex_combination(f1, f2, lambda)?;
    if !f.is_strictly_increasing() {
        return Err(Error::Construction("the combined distribution function is flat somewhere and cannot be inverted".into()));
    }
    Ok(f)
}

/// Root of `g(x) = target` on `[lo, hi]` for continuous nondecreasing `g`
/// with `g(lo) ≤ target ≤ g(hi)` (Illinois variant of regula falsi).
pub(crate) fn bracketed_root(g: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a) - target, g(b) - target);
    if fa >= 0.0 {
        return a;
    }
    if fb <= 0.0 {
        return b;
    }
    let mut side = 0i8;
    for _ in 0..ROOT_MAX_ITER {
        let mut m = (a * fb - b * fa) / (fb - fa);
        if !(m > a && m < b) {
            m = 0.5 * (a + b);
        }
        if m <= a || m >= b {
            break;
        }
        let fm = g(m) - target;
        if fm == 0.0 {
            return m;
        }
        if fm < 0.0 {
            a = m;
            fa = fm;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = m;
            fb = fm;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(1e-300) {
            break;
        }
    }
    if -fa < fb {
        a
    } else {
        b
    }
}

/// One piece of the envelope with the data needed for `η̄⁻¹`.
struct Piece {
    b1: Branch,
    b2: Branch,
    f1: DistributionFunction,
    f2: DistributionFunction,
    f: DistributionFunction,
    lambda: f64,
    lo: f64,
    hi: f64,
}

impl Piece {
    /// The argument of `F⁻¹`.
    fn level(&self, x: f64) -> f64 {
        self.lambda * self.f1.eval(self.b1.extended_inverse(x)) + (1.0 - self.lambda) * self.f2.eval(self.b2.extended_inverse(x))
    }

    fn psi_of_level(&self, u: f64) -> f64 {
        self.f.invert_unchecked(u.clamp(0.0, 1.0)).clamp(self.lo, self.hi)
    }

    fn psi(&self, x: f64) -> f64 {
        self.psi_of_level(self.level(x))
    }

    /// Points between which the level is either constant or strictly monotone.
    fn critical_points(&self) -> Vec<f64> {
        let mut k = vec![0.0, 1.0];
        for b in [&self.b1, &self.b2] {
            let (l, h) = b.image();
            k.push(l);
            k.push(h);
        }
        for (b, f) in [(&self.b1, &self.f1), (&self.b2, &self.f2)] {
            for (lo, hi, _) in f.flat_intervals() {
                for z in [lo, hi] {
                    if z >= self.lo && z <= self.hi {
                        k.push(b.eval(z));
                    }
                }
            }
        }
        let mut k: Vec<f64> = k.into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    fn is_flat(&self, x0: f64, x1: f64) -> bool {
        let u0 = self.level(x0);
        [0.25, 0.5, 0.75, 1.0].iter().all(|t| self.level(x0 + t * (x1 - x0)) == u0)
    }

    /// Maximal stretches `[x_s, x_e]` on which the level rises.
    fn runs(&self) -> Vec<(f64, f64)> {
        let k = self.critical_points();
        let mut runs: Vec<(f64, f64)> = Vec::new();
        let mut open = false;
        for w in k.windows(2) {
            if self.is_flat(w[0], w[1]) {
                open = false;
                continue;
            }
            match runs.last_mut() {
                Some(r) if open => r.1 = w[1],
                _ => runs.push((w[0], w[1])),
            }
            open = true;
        }
        runs
    }
}

pub(crate) type Psi = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Branch on `[t_lo, t_hi]` whose inverse is `psi` restricted to `run`; the
/// forward map is found by root finding inside a table of `resolution` cells.
pub(crate) fn inverse_closure_branch(
    psi: Psi,
    run: (f64, f64),
    t_lo: Q,
    t_hi: Q,
    resolution: usize,
    monotonicity: Monotonicity,
    label: String,
) -> Result<Branch> {
    let sign = if monotonicity == Monotonicity::Increasing { 1.0 } else { -1.0 };
    let n = resolution;
    let xs: Vec<f64> = (0..=n).map(|k| run.0 + (run.1 - run.0) * k as f64 / n as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|x| sign * psi(*x)).collect();
    let p = psi.clone();
    let forward = move |t: f64| {
        let target = sign * t;
        let i = vs.partition_point(|v| *v < target);
        if i == 0 {
            return xs[0];
        }
        if i == vs.len() {
            return xs[n];
        }
        bracketed_root(|x| sign * p(x), target, xs[i - 1], xs[i])
    };
    let closure = MonotoneClosure::new(label, to_f64(&t_lo), to_f64(&t_hi), forward, Some(psi), 1e-12);
    Branch::with_monotonicity(Interval::new(t_lo, t_hi)?, BranchForm::Closure(closure), monotonicity)
}

fn general_branches(
    env: &Envelope,
    f1: &DistributionFunction,
    f2: &DistributionFunction,
    f: &DistributionFunction,
    lambda: f64,
    resolution: usize,
) -> Result<Vec<Branch>> {
    let mut out = Vec::new();
    for (j, (b1, b2)) in env.tau1().branches().iter().zip(env.tau2().branches()).enumerate() {
        let (lo, hi) = b1.domain_f64();
        let piece = Arc::new(Piece { b1: b1.clone(), b2: b2.clone(), f1: f1.clone(), f2: f2.clone(), f: f.clone(), lambda, lo, hi });
        let runs = piece.runs();
        if runs.is_empty() {
            return Err(Error::Construction(format!("extended inverse on piece {j} never rises")));
        }
        let inc = b1.is_increasing();
        let d = b1.domain();
        let (start, end) = if inc { (d.lo.clone(), d.hi.clone()) } else { (d.hi.clone(), d.lo.clone()) };
        let last = runs.len() - 1;
        let mut branches = Vec::with_capacity(runs.len());
        for (r, &(xs, xe)) in runs.iter().enumerate() {
            let ts = if r == 0 { start.clone() } else { from_f64(piece.psi(xs)) };
            let te = if r == last { end.clone() } else { from_f64(piece.psi(xe)) };
            let (t_lo, t_hi) = if inc { (ts, te) } else { (te, ts) };
            if t_lo >= t_hi {
                return Err(Error::Construction(format!("branch {r} of piece {j} collapses to a point")));
            }
            let label = format!("eta[{j}.{r}]");
            let p = piece.clone();
            let psi: Psi = Arc::new(move |x: f64| p.psi(x));
            branches.push(inverse_closure_branch(psi, (xs, xe), t_lo, t_hi, resolution, b1.monotonicity(), label)?);
        }
        if !inc {
            branches.reverse();
        }
        out.extend(branches);
    }
    Ok(out)
}

fn exact_branches(env: &Envelope, f1: &PlFunction, f2: &PlFunction, lambda: &Q) -> Result<Option<Vec<Branch>>> {
    let mu = qi(1) - lambda;
    let f = PlFunction::linear_combination(lambda, f1, &mu, f2)?;
    let finv = f.inverse().map_err(|_| Error::Construction("the combined distribution function is not invertible".into()))?;
    let mut out = Vec::new();
    for (b1, b2) in env.tau1().branches().iter().zip(env.tau2().branches()) {
        let (Some(e1), Some(e2)) = (b1.extended_inverse_pl(), b2.extended_inverse_pl()) else {
            return Ok(None);
        };
        let g1 = PlFunction::compose(f1, &e1)?;
        let g2 = PlFunction::compose(f2, &e2)?;
        let u = PlFunction::linear_combination(lambda, &g1, &mu, &g2)?;
        let psi = PlFunction::compose(&finv, &u)?;
        let (xs, ys) = (psi.knots(), psi.values());
        let mut branches = Vec::new();
        for k in 0..psi.pieces() {
            let (x0, x1, y0, y1) = (&xs[k], &xs[k + 1], &ys[k], &ys[k + 1]);
            if y0 == y1 {
                continue;
            }
            let slope = (x1 - x0) / (y1 - y0);
            let intercept = x0 - &slope * y0;
            let (lo, hi) = if y0 < y1 { (y0.clone(), y1.clone()) } else { (y1.clone(), y0.clone()) };
            branches.push(Branch::with_monotonicity(Interval::new(lo, hi)?, BranchForm::affine(slope, intercept), b1.monotonicity())?);
        }
        if !b1.is_increasing() {
            branches.reverse();
        }
        out.extend(branches);
    }
    Ok(Some(out))
}

/// The selection whose branches have extended inverses
/// `η̄ⱼ⁻¹ = F⁻¹(λ F1 ∘ τ̄₁ⱼ⁻¹ + (1 − λ) F2 ∘ τ̄₂ⱼ⁻¹)`, with `F = λ F1 + (1 − λ) F2`.
///
/// Stretches where `η̄ⱼ⁻¹` is constant become jumps of `η`. For affine envelopes
/// and piecewise linear `F1`, `F2` the result is exact; otherwise each branch is
/// the numerical inverse of `η̄ⱼ⁻¹` bracketed by a table of `resolution` points.
pub fn construct_selection(
    env: &Envelope,
    f1: &DistributionFunction,
    f2: &DistributionFunction,
    lambda: &Q,
    resolution: usize,
) -> Result<SelectionResult> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::Parameter(format!("resolution must be at least {MIN_RESOLUTION}")));
    }
    if !env.tau1().is_unit_domain() {
        return Err(Error::Parameter("envelope must live on [0, 1]".into()));
    }
    let f = combined_cdf(f1, f2, lambda)?;
    let exact = match (env.is_affine(), f1.as_linear(), f2.as_linear()) {
        (true, Some(p1), Some(p2)) => exact_branches(env, &p1, &p2, lambda)?,
        _ => None,
    };
    let is_exact = exact.is_some();
    let branches = match exact {
        Some(b) => b,
        None => general_branches(env, f1, f2, &f, to_f64(lambda), resolution)?,
    };
    let eta = PiecewiseMonotoneMap::new(branches)?;
    assert_between(&eta, env)?;
    let target_cdf = match f.as_linear() {
        Some(p) => DistributionFunction::linear(p)?,
        None => f,
    };
    Ok(SelectionResult { eta, target_cdf, construction: Construction::MainTheorem, lambda: lambda.clone(), exact: is_exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{envelope, registry};
    use crate::interval_maps::{sup_difference, sup_difference_exact, validate_envelope};
    use crate::measures::PiecewiseConstantDensity;
    use crate::rational::q;
    use crate::selection::betweenness_check;
    use crate::transfer::fp_apply;

    #[test]
    fn tent_collapses_to_tent() {
        let t = PiecewiseMonotoneMap::tent();
        let env = validate_envelope(&t, &t).unwrap();
        let id = DistributionFunction::identity();
        let r = construct_selection(&env, &id, &id, &q(1, 3), 64).unwrap();
        assert!(r.exact);
        assert!(sup_difference_exact(&r.eta, &t).unwrap() == qi(0));
    }

    #[test]
    fn curved_identity_path_matches_tent() {
        let t = PiecewiseMonotoneMap::tent();
        let env = validate_envelope(&t, &t).unwrap();
        let phi = registry::get_cdf("sec4/phi1").unwrap();
        let g = registry::get_map("sec4/tau1").unwrap();
        let env2 = validate_envelope(&g, &g).unwrap();
        let r = construct_selection(&env2, &phi, &phi, &q(1, 2), 256).unwrap();
        assert!(!r.exact);
        assert!(sup_difference(&r.eta, &g, 2000).unwrap().0 < 1e-10);
        assert!(construct_selection(&env, &phi, &phi, &q(1, 2), 8).is_err());
    }

    #[test]
    fn lebesgue_selection_for_the_first_example() {
        let ex = envelope("ex2.1").unwrap();
        let r = construct_selection(&ex.envelope, &ex.f1, &ex.f2, &q(2, 5), 64).unwrap();
        assert!(r.exact);
        let u = PiecewiseConstantDensity::uniform();
        assert!(fp_apply(&r.eta, &u).unwrap().same_density(&u));
        assert!(r.invariance(1024).unwrap().exact);
        let b = betweenness_check(&r.eta, &ex.envelope, 10_000).unwrap();
        assert!(b.max_violation() < 1e-12);
        // some branch lies strictly between the two maps
        let strictly = (1..100).map(|k| k as f64 / 100.0).any(|x| {
            let e = r.eta.evaluate(x).unwrap();
            e > ex.envelope.tau1().evaluate(x).unwrap() + 1e-9 && e < ex.envelope.tau2().evaluate(x).unwrap() - 1e-9
        });
        assert!(strictly);
    }

    #[test]
    fn curved_example_preserves_the_mixture() {
        let ex = envelope("sec4").unwrap();
        let r = construct_selection(&ex.envelope, &ex.f1, &ex.f2, &q(3, 4), 1 << 10).unwrap();
        assert_eq!(r.eta.monotonicity_pattern(), ex.envelope.tau1().monotonicity_pattern());
        let inv = r.invariance(1 << 12).unwrap();
        assert!(inv.sup_error < 1e-8, "{inv:?}");
    }

    #[test]
    fn flat_combination_is_rejected() {
        let f = registry::get("sec5/f1").unwrap().into_cdf().unwrap();
        let t = PiecewiseMonotoneMap::tent();
        let env = validate_envelope(&t, &t).unwrap();
        let r = construct_selection(&env, &f, &f, &q(1, 2), 64);
        assert!(matches!(r, Err(Error::Construction(_))));
    }

    #[test]
    fn root_finder_hits_machine_precision() {
        let x = bracketed_root(|x| x * x * x, 0.2, 0.0, 1.0);
        assert!((x - 0.2f64.cbrt()).abs() < 1e-15);
        assert_eq!(bracketed_root(|x| x, -1.0, 0.0, 1.0), 0.0);
    }
}
