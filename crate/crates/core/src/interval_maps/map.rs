use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measures::DistributionFunction;
use crate::pl::PlFunction;
use crate::rational::{self, from_f64, to_f64, Q};

use super::branch::{Branch, BranchForm, Interval, Monotonicity};

/// An interval map made of finitely many strictly monotone branches.
///
/// Branch `j` lives on `[a_j, a_{j+1}]`. At an interior breakpoint the left
/// branch is used by [`PiecewiseMonotoneMap::evaluate`].
#[derive(Debug, Clone)]
pub struct PiecewiseMonotoneMap {
    breakpoints: Vec<Q>,
    breakpoints_f64: Vec<f64>,
    branches: Vec<Branch>,
}

impl PiecewiseMonotoneMap {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidMap("a map needs at least one branch".into()));
        }
        for w in branches.windows(2) {
            if w[0].domain().hi != w[1].domain().lo {
                return Err(Error::InvalidMap(format!(
                    "branch domains do not tile: {} then {}",
                    rational::format_q(&w[0].domain().hi),
                    rational::format_q(&w[1].domain().lo)
                )));
            }
        }
        let mut breakpoints: Vec<Q> = branches.iter().map(|b| b.domain().lo.clone()).collect();
        breakpoints.push(branches.last().unwrap().domain().hi.clone());
        let breakpoints_f64 = breakpoints.iter().map(to_f64).collect();
        Ok(PiecewiseMonotoneMap { breakpoints, breakpoints_f64, branches })
    }

    /// Builds an affine map from `(lo, hi, slope, intercept)` pieces.
    pub fn affine(pieces: &[(Q, Q, Q, Q)]) -> Result<Self> {
        let branches =
            pieces.iter().map(|(lo, hi, s, c)| Branch::affine(lo.clone(), hi.clone(), s.clone(), c.clone())).collect::<Result<Vec<_>>>()?;
        Self::new(branches)
    }

    /// The tent map `1 − 2|x − 1/2|`.
    pub fn tent() -> Self {
        use rational::{q, qi};
        Self::affine(&[(qi(0), q(1, 2), qi(2), qi(0)), (q(1, 2), qi(1), qi(-2), qi(2))]).unwrap()
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    pub fn breakpoints_f64(&self) -> &[f64] {
        &self.breakpoints_f64
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn domain(&self) -> Interval {
        Interval { lo: self.breakpoints[0].clone(), hi: self.breakpoints.last().unwrap().clone() }
    }

    pub fn is_unit_domain(&self) -> bool {
        self.breakpoints[0].is_zero() && *self.breakpoints.last().unwrap() == rational::qi(1)
    }

    pub fn is_affine(&self) -> bool {
        self.branches.iter().all(|b| b.form().is_affine())
    }

    pub fn monotonicity_pattern(&self) -> Vec<Monotonicity> {
        self.branches.iter().map(Branch::monotonicity).collect()
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = (self.breakpoints_f64[0], *self.breakpoints_f64.last().unwrap());
        if x.is_nan() || x < lo || x > hi {
            return Err(Error::Domain { x, lo, hi });
        }
        Ok(())
    }

    /// Index of the branch used at `x` (left branch at interior breakpoints).
    pub fn branch_index(&self, x: f64) -> usize {
        let m = self.branches.len();
        self.breakpoints_f64[1..m].partition_point(|b| *b < x)
    }

    fn branch_index_right(&self, x: f64) -> usize {
        let m = self.branches.len();
        self.breakpoints_f64[1..m].partition_point(|b| *b <= x)
    }

    fn branch_index_exact(&self, x: &Q) -> usize {
        let m = self.branches.len();
        self.breakpoints[1..m].partition_point(|b| b < x)
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.branches[self.branch_index(x)].eval(x))
    }

    /// As [`evaluate`](Self::evaluate) but using the right branch at interior breakpoints.
    pub fn evaluate_right(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.branches[self.branch_index_right(x)].eval(x))
    }

    /// Exact value for affine and quadratic branches.
    pub fn evaluate_exact(&self, x: &Q) -> Result<Q> {
        let d = self.domain();
        if !d.contains(x) {
            return Err(Error::Domain { x: to_f64(x), lo: d.lo_f64(), hi: d.hi_f64() });
        }
        self.branches[self.branch_index_exact(x)]
            .eval_exact(x)
            .ok_or_else(|| Error::Unsupported("exact evaluation needs affine or quadratic branches".into()))
    }

    /// The map with extra breakpoints inserted; values are unchanged.
    pub fn refine(&self, points: &[Q]) -> Result<Self> {
        let mut branches = Vec::new();
        for b in &self.branches {
            let d = b.domain();
            let mut cuts: Vec<Q> = points.iter().filter(|p| **p > d.lo && **p < d.hi).cloned().collect();
            cuts.sort();
            cuts.dedup();
            let mut lo = d.lo.clone();
            for c in cuts.into_iter().chain(std::iter::once(d.hi.clone())) {
                branches.push(b.restricted(lo.clone(), c.clone())?);
                lo = c;
            }
        }
        Self::new(branches)
    }

    /// The map restricted to `[lo, hi]`.
    pub fn restrict(&self, lo: &Q, hi: &Q) -> Result<Self> {
        let d = self.domain();
        if lo >= hi || *lo < d.lo || *hi > d.hi {
            return Err(Error::Parameter("restriction must be a nondegenerate subinterval".into()));
        }
        let refined = self.refine(&[lo.clone(), hi.clone()])?;
        let kept = refined.branches.into_iter().filter(|b| b.domain().lo >= *lo && b.domain().hi <= *hi).collect();
        Self::new(kept)
    }

    /// Removes breakpoints between affine branches with identical formulas.
    pub fn merged(&self) -> Self {
        let mut out: Vec<Branch> = Vec::new();
        for b in &self.branches {
            if let (Some(prev), BranchForm::Affine { slope, intercept }) = (out.last(), b.form()) {
                if let BranchForm::Affine { slope: s, intercept: c } = prev.form() {
                    if s == slope && c == intercept {
                        let lo = prev.domain().lo.clone();
                        let joined = Branch::affine(lo, b.domain().hi.clone(), slope.clone(), intercept.clone()).unwrap();
                        *out.last_mut().unwrap() = joined;
                        continue;
                    }
                }
            }
            out.push(b.clone());
        }
        Self::new(out).unwrap()
    }

    /// True when consecutive branches agree at their shared breakpoints.
    pub fn is_continuous(&self, tol: f64) -> bool {
        self.branches.windows(2).all(|w| match (w[0].eval_exact(&w[0].domain().hi), w[1].eval_exact(&w[1].domain().lo)) {
            (Some(a), Some(b)) => a == b,
            _ => (w[0].eval(w[0].domain_f64().1) - w[1].eval(w[1].domain_f64().0)).abs() <= tol,
        })
    }

    /// Continuous affine map as an exact piecewise linear function.
    pub fn to_pl(&self) -> Option<PlFunction> {
        if !self.is_affine() || !self.is_continuous(0.0) {
            return None;
        }
        let ys = self
            .breakpoints
            .iter()
            .enumerate()
            .map(|(i, x)| self.branches[i.min(self.branches.len() - 1)].eval_exact(x).unwrap())
            .collect();
        PlFunction::new(self.breakpoints.clone(), ys).ok().map(|f| f.simplified())
    }

    /// Affine map from a piecewise linear function with no flat pieces.
    pub fn from_pl(f: &PlFunction) -> Result<Self> {
        let xs = f.knots();
        let slopes = f.slopes();
        let pieces: Vec<(Q, Q, Q, Q)> = (0..f.pieces())
            .map(|i| {
                let c = &f.values()[i] - &slopes[i] * &xs[i];
                (xs[i].clone(), xs[i + 1].clone(), slopes[i].clone(), c)
            })
            .collect();
        Self::affine(&pieces)
    }

    /// Inverse of a continuous, strictly monotone affine map.
    pub fn inverse(&self) -> Result<Self> {
        let f = self.to_pl().ok_or_else(|| Error::Unsupported("inverse needs a continuous affine map".into()))?;
        Self::from_pl(&f.inverse().map_err(|_| Error::Structural("map is not invertible".into()))?)
    }

    /// `outer ∘ inner`, exact, for affine maps. The image of `inner` must lie in the domain of `outer`.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        if !outer.is_affine() || !inner.is_affine() {
            return Err(Error::Unsupported("exact composition needs affine maps".into()));
        }
        let od = outer.domain();
        let mut branches = Vec::new();
        for b in &inner.branches {
            let (ylo, yhi) = b.image_exact().unwrap();
            if ylo < od.lo || yhi > od.hi {
                return Err(Error::Parameter("inner image leaves the outer domain".into()));
            }
            let cuts: Vec<Q> = outer.breakpoints[1..outer.branches.len()]
                .iter()
                .filter(|k| **k > ylo && **k < yhi)
                .map(|k| b.inverse_exact(k).unwrap())
                .collect();
            let piece = PiecewiseMonotoneMap::new(vec![b.clone()])?.refine(&cuts)?;
            for p in piece.branches {
                let mid = (&p.domain().lo + &p.domain().hi) / rational::qi(2);
                let y = p.eval_exact(&mid).unwrap();
                let ob = &outer.branches[outer.branch_index_exact(&y)];
                let (BranchForm::Affine { slope: si, intercept: ci }, BranchForm::Affine { slope: so, intercept: co }) =
                    (p.form(), ob.form())
                else {
                    unreachable!()
                };
                branches.push(Branch::affine(p.domain().lo.clone(), p.domain().hi.clone(), so * si, so * ci + co)?);
            }
        }
        Ok(Self::new(branches)?.merged())
    }

    /// `g⁻¹ ∘ self ∘ g` for a homeomorphism `g` of `[0, 1]`.
    pub fn conjugate(&self, g: &DistributionFunction) -> Result<Self> {
        if !self.is_unit_domain() {
            return Err(Error::Parameter("conjugation needs a map on [0, 1]".into()));
        }
        g.validate()?;
        if !g.is_strictly_increasing() {
            return Err(Error::Parameter("conjugating function is not a homeomorphism of [0, 1]".into()));
        }
        let g = Arc::new(g.clone());
        let mut cuts: Vec<Q> = Vec::with_capacity(self.breakpoints.len());
        for (i, b) in self.breakpoints.iter().enumerate() {
            let x = if i == 0 || i + 1 == self.breakpoints.len() { b.clone() } else { from_f64(g.invert(to_f64(b))?) };
            cuts.push(x);
        }
        let mut branches = Vec::new();
        for (j, b) in self.branches.iter().enumerate() {
            let inner = BranchForm::compose(b.form().clone(), BranchForm::Cdf { cdf: g.clone(), inverted: false });
            let form = BranchForm::compose(BranchForm::Cdf { cdf: g.clone(), inverted: true }, inner);
            let dom = Interval::new(cuts[j].clone(), cuts[j + 1].clone())?;
            branches.push(Branch::with_monotonicity(dom, form, b.monotonicity())?);
        }
        Self::new(branches)
    }

    /// Images of every branch endpoint, as exact values where available.
    pub fn endpoint_images_exact(&self) -> Option<Vec<Q>> {
        let mut out = Vec::new();
        for b in &self.branches {
            out.push(b.eval_exact(&b.domain().lo)?);
            out.push(b.eval_exact(&b.domain().hi)?);
        }
        out.sort();
        out.dedup();
        Some(out)
    }

    /// Samples `(x, τ(x))` on `n + 1` equispaced points plus both sides of each breakpoint.
    pub fn graph(&self, n: usize) -> Vec<(f64, f64)> {
        let d = self.domain();
        let (lo, hi) = (d.lo_f64(), d.hi_f64());
        let mut xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        xs.extend_from_slice(&self.breakpoints_f64);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut out = Vec::with_capacity(xs.len() + self.branches.len());
        for x in xs {
            let y = self.evaluate(x).unwrap();
            out.push((x, y));
            let yr = self.evaluate_right(x).unwrap();
            if yr != y {
                out.push((x, yr));
            }
        }
        out
    }
}

/// Both maps on the union of their breakpoints.
pub fn common_refinement(m1: &PiecewiseMonotoneMap, m2: &PiecewiseMonotoneMap) -> Result<(PiecewiseMonotoneMap, PiecewiseMonotoneMap)> {
    if m1.domain() != m2.domain() {
        return Err(Error::Parameter("maps live on different domains".into()));
    }
    let r1 = m1.refine(m2.breakpoints()).map_err(|e| Error::Structural(e.to_string()))?;
    let r2 = m2.refine(m1.breakpoints()).map_err(|e| Error::Structural(e.to_string()))?;
    debug_assert_eq!(r1.breakpoints(), r2.breakpoints());
    Ok((r1, r2))
}

/// Largest `|m1 − m2|` over `n + 1` grid points and every breakpoint of either map (both sides).
pub fn sup_difference(m1: &PiecewiseMonotoneMap, m2: &PiecewiseMonotoneMap, n: usize) -> Result<(f64, f64)> {
    let d = m1.domain();
    let (lo, hi) = (d.lo_f64(), d.hi_f64());
    let mut xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    xs.extend_from_slice(m1.breakpoints_f64());
    xs.extend_from_slice(m2.breakpoints_f64());
    let mut best = (0.0f64, lo);
    for x in xs {
        for (a, b) in [(m1.evaluate(x)?, m2.evaluate(x)?), (m1.evaluate_right(x)?, m2.evaluate_right(x)?)] {
            let e = (a - b).abs();
            if e > best.0 {
                best = (e, x);
            }
        }
    }
    Ok(best)
}

/// Exact largest `|m1 − m2|` for affine maps (both sides of every breakpoint).
pub fn sup_difference_exact(m1: &PiecewiseMonotoneMap, m2: &PiecewiseMonotoneMap) -> Result<Q> {
    let (r1, r2) = common_refinement(m1, m2)?;
    let mut best = Q::zero();
    for (b1, b2) in r1.branches().iter().zip(r2.branches()) {
        for x in [&b1.domain().lo, &b1.domain().hi] {
            let (Some(u), Some(v)) = (b1.eval_exact(x), b2.eval_exact(x)) else {
                return Err(Error::Unsupported("exact comparison needs affine branches".into()));
            };
            let e = (u - v).abs();
            if e > best {
                best = e;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use approx::assert_abs_diff_eq;

    fn ex_tau1() -> PiecewiseMonotoneMap {
        PiecewiseMonotoneMap::affine(&[
            (qi(0), q(3, 8), q(4, 3), qi(0)),
            (q(3, 8), q(1, 2), qi(4), qi(-1)),
            (q(1, 2), q(5, 8), qi(-4), qi(3)),
            (q(5, 8), qi(1), q(-4, 3), q(4, 3)),
        ])
        .unwrap()
    }

    fn ex_tau2() -> PiecewiseMonotoneMap {
        PiecewiseMonotoneMap::affine(&[
            (qi(0), q(1, 6), qi(3), qi(0)),
            (q(1, 6), q(1, 2), q(3, 2), q(1, 4)),
            (q(1, 2), q(5, 6), q(-3, 2), q(7, 4)),
            (q(5, 6), qi(1), qi(-3), qi(3)),
        ])
        .unwrap()
    }

    #[test]
    fn evaluation_and_domain() {
        let t = ex_tau1();
        assert_eq!(t.evaluate(0.375).unwrap(), 0.5);
        assert_eq!(t.evaluate_exact(&q(3, 8)).unwrap(), q(1, 2));
        assert_eq!(PiecewiseMonotoneMap::tent().evaluate(0.5).unwrap(), 1.0);
        assert!(matches!(t.evaluate(1.5), Err(Error::Domain { .. })));
        assert!(matches!(t.evaluate(-0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn left_branch_owns_interior_breakpoints() {
        let m = PiecewiseMonotoneMap::affine(&[(qi(0), q(1, 2), qi(2), qi(0)), (q(1, 2), qi(1), qi(2), qi(-1))]).unwrap();
        assert_eq!(m.evaluate(0.5).unwrap(), 1.0);
        assert_eq!(m.evaluate_right(0.5).unwrap(), 0.0);
    }

    #[test]
    fn refinement_unions_breakpoints() {
        let (a, b) = common_refinement(&ex_tau1(), &ex_tau2()).unwrap();
        let expected = vec![qi(0), q(1, 6), q(3, 8), q(1, 2), q(5, 8), q(5, 6), qi(1)];
        assert_eq!(a.breakpoints(), expected.as_slice());
        assert_eq!(b.breakpoints(), expected.as_slice());
        assert_eq!(sup_difference(&a, &ex_tau1(), 1000).unwrap().0, 0.0);
        assert_eq!(sup_difference(&b, &ex_tau2(), 1000).unwrap().0, 0.0);
        let half = PiecewiseMonotoneMap::tent();
        let quarter = PiecewiseMonotoneMap::affine(&[(qi(0), q(1, 4), qi(4), qi(0)), (q(1, 4), qi(1), q(-4, 3), q(4, 3))]).unwrap();
        let (c, _) = common_refinement(&half, &quarter).unwrap();
        assert_eq!(c.breakpoints(), &[qi(0), q(1, 4), q(1, 2), qi(1)]);
        let (d, e) = common_refinement(&half, &half).unwrap();
        assert_eq!(d.breakpoints(), half.breakpoints());
        assert_eq!(e.breakpoints(), half.breakpoints());
    }

    #[test]
    fn exact_inverse_and_composition() {
        let t2 = ex_tau2();
        let left = t2.restrict(&qi(0), &q(1, 2)).unwrap();
        let inv = left.inverse().unwrap();
        assert_eq!(inv.evaluate_exact(&qi(1)).unwrap(), q(1, 2));
        let id = PiecewiseMonotoneMap::compose(&inv, &left).unwrap();
        assert_eq!(id.branches().len(), 1);
        assert_eq!(id.evaluate_exact(&q(1, 7)).unwrap(), q(1, 7));
    }

    #[test]
    fn conjugation_by_identity_is_trivial() {
        let t = PiecewiseMonotoneMap::tent();
        let c = t.conjugate(&DistributionFunction::identity()).unwrap();
        assert_eq!(c.breakpoints(), t.breakpoints());
        assert!(sup_difference(&c, &t, 1000).unwrap().0 < 1e-15);
        assert_abs_diff_eq!(c.branches()[0].inverse(0.5).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn conjugation_rejects_non_homeomorphisms() {
        let d = crate::measures::PiecewiseConstantDensity::new(vec![qi(0), q(1, 4), q(3, 4), qi(1)], vec![qi(0), qi(2), qi(0)]).unwrap();
        let g = DistributionFunction::from_density(&d);
        assert!(PiecewiseMonotoneMap::tent().conjugate(&g).is_err());
    }
}
