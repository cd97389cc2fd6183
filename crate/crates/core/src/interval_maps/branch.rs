use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::cdf::{bisect_nondecreasing, quadratic_root};
use crate::measures::DistributionFunction;
use crate::pl::PlFunction;
use crate::rational::{self, to_f64, Q};

/// Tolerance used when a computed value must lie in `[0, 1]` or in a branch image.
pub const IMAGE_TOL: f64 = 1e-12;

/// A closed subinterval `[lo, hi]` of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "rational::serde_q")]
    pub lo: Q,
    #[serde(with = "rational::serde_q")]
    pub hi: Q,
}

impl Interval {
    pub fn new(lo: Q, hi: Q) -> Result<Self> {
        if lo > hi || lo.is_negative() || hi > rational::qi(1) {
            return Err(Error::Parameter(format!(
                "[{}, {}] is not a subinterval of [0, 1]",
                rational::format_q(&lo),
                rational::format_q(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval { lo: Q::zero(), hi: rational::qi(1) }
    }

    pub fn lo_f64(&self) -> f64 {
        to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        to_f64(&self.hi)
    }

    pub fn length(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Monotonicity {
    #[serde(rename = "inc")]
    Increasing,
    #[serde(rename = "dec")]
    Decreasing,
}

/// Forward and inverse evaluators of a strictly monotone function on `[lo, hi]`.
///
/// Without an inverse evaluator the inverse is found by bisection.
#[derive(Clone)]
pub struct MonotoneClosure {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
    forward: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    inverse: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    /// Declared accuracy of the inverse evaluator.
    pub tolerance: f64,
}

impl fmt::Debug for MonotoneClosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneClosure")
            .field("label", &self.label)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("has_inverse", &self.inverse.is_some())
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl MonotoneClosure {
    pub fn new(
        label: impl Into<String>,
        lo: f64,
        hi: f64,
        forward: impl Fn(f64) -> f64 + Send + Sync + 'static,
        inverse: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
        tolerance: f64,
    ) -> Self {
        MonotoneClosure { label: label.into(), lo, hi, forward: Arc::new(forward), inverse, tolerance }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    /// Linear interpolation through a strictly monotone table; the inverse swaps the columns.
    pub fn tabulated(label: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>) -> crate::Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n || xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMap("table needs at least two strictly increasing abscissae".into()));
        }
        let increasing = ys[n - 1] > ys[0];
        if ys.windows(2).any(|w| if increasing { w[0] >= w[1] } else { w[0] <= w[1] }) {
            return Err(Error::InvalidMap("table values are not strictly monotone".into()));
        }
        let (lo, hi) = (xs[0], xs[n - 1]);
        let (fx, fy) = (xs.clone(), ys.clone());
        let forward = move |x: f64| interpolate(&fx, &fy, x);
        let (mut ix, mut iy) = (ys, xs);
        if !increasing {
            ix.reverse();
            iy.reverse();
        }
        let inverse: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |y: f64| interpolate(&ix, &iy, y));
        Ok(Self::new(label, lo, hi, forward, Some(inverse), 0.0))
    }

    /// The table `(x, f(x))` on `n + 1` equispaced points of the domain.
    pub fn sample(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let xs: Vec<f64> = (0..=n).map(|k| self.lo + (self.hi - self.lo) * k as f64 / n as f64).collect();
        let ys = xs.iter().map(|x| self.eval(*x)).collect();
        (xs, ys)
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    fn invert(&self, y: f64) -> f64 {
        match &self.inverse {
            Some(inv) => inv(y),
            None => {
                let increasing = self.eval(self.hi) >= self.eval(self.lo);
                if increasing {
                    bisect_nondecreasing(|x| self.eval(x), y, self.lo, self.hi)
                } else {
                    bisect_nondecreasing(|x| -self.eval(x), -y, self.lo, self.hi)
                }
            }
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|k| *k < x).clamp(1, xs.len() - 1);
    let t = ((x - xs[i - 1]) / (xs[i] - xs[i - 1])).clamp(0.0, 1.0);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

/// How a branch computes its values.
#[derive(Debug, Clone)]
pub enum BranchForm {
    /// `slope · x + intercept`, exact.
    Affine { slope: Q, intercept: Q },
    /// `a x² + b x + c` on a region where it is strictly monotone; `lo`, `hi`
    /// bound that region and select the root when inverting.
    Quadratic { a: Q, b: Q, c: Q, lo: f64, hi: f64 },
    /// A distribution function used as a homeomorphism (`inverted` evaluates `F⁻¹`).
    Cdf { cdf: Arc<DistributionFunction>, inverted: bool },
    /// Paired monotone callables.
    Closure(MonotoneClosure),
    /// `outer ∘ inner`.
    Composite { outer: Box<BranchForm>, inner: Box<BranchForm> },
}

impl BranchForm {
    pub fn affine(slope: Q, intercept: Q) -> Self {
        BranchForm::Affine { slope, intercept }
    }

    pub fn quadratic(a: Q, b: Q, c: Q, lo: f64, hi: f64) -> Self {
        BranchForm::Quadratic { a, b, c, lo, hi }
    }

    pub fn compose(outer: BranchForm, inner: BranchForm) -> Self {
        BranchForm::Composite { outer: Box::new(outer), inner: Box::new(inner) }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            BranchForm::Affine { slope, intercept } => to_f64(slope) * x + to_f64(intercept),
            BranchForm::Quadratic { a, b, c, .. } => (to_f64(a) * x + to_f64(b)) * x + to_f64(c),
            BranchForm::Cdf { cdf, inverted: false } => cdf.eval(x),
            BranchForm::Cdf { cdf, inverted: true } => cdf.invert_unchecked(x.clamp(0.0, 1.0)),
            BranchForm::Closure(c) => c.eval(x),
            BranchForm::Composite { outer, inner } => outer.eval(inner.eval(x)),
        }
    }

    pub fn eval_exact(&self, x: &Q) -> Option<Q> {
        match self {
            BranchForm::Affine { slope, intercept } => Some(slope * x + intercept),
            BranchForm::Quadratic { a, b, c, .. } => Some((a * x + b) * x + c),
            _ => None,
        }
    }

    /// Inverse of the form restricted to `[lo, hi]` (needed to pick quadratic roots).
    pub fn invert(&self, y: f64, lo: f64, hi: f64) -> f64 {
        match self {
            BranchForm::Affine { slope, intercept } => (y - to_f64(intercept)) / to_f64(slope),
            BranchForm::Quadratic { a, b, c, .. } => quadratic_root(to_f64(a), to_f64(b), to_f64(c), y, lo, hi),
            BranchForm::Cdf { cdf, inverted: false } => cdf.invert_unchecked(y.clamp(0.0, 1.0)),
            BranchForm::Cdf { cdf, inverted: true } => cdf.eval(y),
            BranchForm::Closure(c) => c.invert(y),
            BranchForm::Composite { outer, inner } => {
                let (a, b) = (inner.eval(lo), inner.eval(hi));
                let mid = outer.invert(y, a.min(b), a.max(b));
                inner.invert(mid, lo, hi)
            }
        }
    }

    pub fn invert_exact(&self, y: &Q) -> Option<Q> {
        match self {
            BranchForm::Affine { slope, intercept } => Some((y - intercept) / slope),
            _ => None,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, BranchForm::Affine { .. })
    }

    /// Declared accuracy of `invert`.
    pub fn inverse_tolerance(&self) -> f64 {
        match self {
            BranchForm::Affine { .. } | BranchForm::Quadratic { .. } => 0.0,
            BranchForm::Cdf { .. } => 1e-12,
            BranchForm::Closure(c) => c.tolerance,
            BranchForm::Composite { outer, inner } => outer.inverse_tolerance() + inner.inverse_tolerance(),
        }
    }
}

/// A strictly monotone piece of an interval map.
#[derive(Debug, Clone)]
pub struct Branch {
    domain: Interval,
    form: BranchForm,
    monotonicity: Monotonicity,
    lo: f64,
    hi: f64,
    image: (f64, f64),
}

impl Branch {
    /// Builds a branch, inferring its monotonicity from the endpoint values.
    pub fn new(domain: Interval, form: BranchForm) -> Result<Self> {
        if domain.lo >= domain.hi {
            return Err(Error::InvalidMap(format!(
                "degenerate branch domain [{}, {}]",
                rational::format_q(&domain.lo),
                rational::format_q(&domain.hi)
            )));
        }
        let (lo, hi) = (domain.lo_f64(), domain.hi_f64());
        let (ya, yb) = match (form.eval_exact(&domain.lo), form.eval_exact(&domain.hi)) {
            (Some(a), Some(b)) => {
                if a == b {
                    return Err(Error::InvalidMap("branch is constant".into()));
                }
                (to_f64(&a), to_f64(&b))
            }
            _ => (form.eval(lo), form.eval(hi)),
        };
        if ya == yb {
            return Err(Error::InvalidMap(format!("branch on [{lo}, {hi}] is not strictly monotone")));
        }
        let monotonicity = if yb > ya { Monotonicity::Increasing } else { Monotonicity::Decreasing };
        if !form.is_affine() {
            let n = 64;
            let values: Vec<f64> = (0..=n).map(|k| form.eval(lo + (hi - lo) * k as f64 / n as f64)).collect();
            let ok = values.windows(2).all(|w| match monotonicity {
                Monotonicity::Increasing => w[1] >= w[0] - IMAGE_TOL,
                Monotonicity::Decreasing => w[1] <= w[0] + IMAGE_TOL,
            });
            if !ok {
                return Err(Error::InvalidMap(format!("branch on [{lo}, {hi}] is not monotone")));
            }
        }
        let image = (ya.min(yb), ya.max(yb));
        if image.0 < -IMAGE_TOL || image.1 > 1.0 + IMAGE_TOL {
            return Err(Error::InvalidMap(format!("branch on [{lo}, {hi}] has image [{}, {}] outside [0, 1]", image.0, image.1)));
        }
        let image = (image.0.max(0.0), image.1.min(1.0));
        Ok(Branch { domain, form, monotonicity, lo, hi, image })
    }

    /// As [`Branch::new`], additionally requiring the stated monotonicity.
    pub fn with_monotonicity(domain: Interval, form: BranchForm, expected: Monotonicity) -> Result<Self> {
        let b = Self::new(domain, form)?;
        if b.monotonicity != expected {
            return Err(Error::InvalidMap(format!("branch on [{}, {}] declared {:?} but is {:?}", b.lo, b.hi, expected, b.monotonicity)));
        }
        Ok(b)
    }

    pub fn affine(lo: Q, hi: Q, slope: Q, intercept: Q) -> Result<Self> {
        Self::new(Interval::new(lo, hi)?, BranchForm::affine(slope, intercept))
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn domain_f64(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn form(&self) -> &BranchForm {
        &self.form
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn is_increasing(&self) -> bool {
        self.monotonicity == Monotonicity::Increasing
    }

    /// `(h_min, h_max)`.
    pub fn image(&self) -> (f64, f64) {
        self.image
    }

    /// Exact image for affine branches.
    pub fn image_exact(&self) -> Option<(Q, Q)> {
        let a = self.form.eval_exact(&self.domain.lo)?;
        let b = self.form.eval_exact(&self.domain.hi)?;
        Some(if a <= b { (a, b) } else { (b, a) })
    }

    pub fn slope(&self) -> Option<&Q> {
        match &self.form {
            BranchForm::Affine { slope, .. } => Some(slope),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.form.eval(x.clamp(self.lo, self.hi)).clamp(0.0, 1.0)
    }

    pub fn eval_exact(&self, x: &Q) -> Option<Q> {
        self.form.eval_exact(x)
    }

    /// The unique `x` in the domain with `eval(x) = y`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let (hmin, hmax) = self.image;
        if y < hmin - IMAGE_TOL || y > hmax + IMAGE_TOL {
            return Err(Error::Range { y, lo: hmin, hi: hmax });
        }
        Ok(self.inverse_clamped(y.clamp(hmin, hmax)))
    }

    fn inverse_clamped(&self, y: f64) -> f64 {
        if y <= self.image.0 {
            return if self.is_increasing() { self.lo } else { self.hi };
        }
        if y >= self.image.1 {
            return if self.is_increasing() { self.hi } else { self.lo };
        }
        self.form.invert(y, self.lo, self.hi).clamp(self.lo, self.hi)
    }

    pub fn inverse_exact(&self, y: &Q) -> Option<Q> {
        self.form.invert_exact(y)
    }

    /// Inverse clamped to the domain endpoints outside the image.
    pub fn extended_inverse(&self, x: f64) -> f64 {
        self.inverse_clamped(x.clamp(0.0, 1.0))
    }

    pub fn extended_inverse_exact(&self, x: &Q) -> Option<Q> {
        let (hmin, hmax) = self.image_exact()?;
        let (at_min, at_max) = if self.is_increasing() { (&self.domain.lo, &self.domain.hi) } else { (&self.domain.hi, &self.domain.lo) };
        Some(if *x <= hmin {
            at_min.clone()
        } else if *x >= hmax {
            at_max.clone()
        } else {
            self.form.invert_exact(x)?
        })
    }

    /// Extended inverse as an exact function on `[0, 1]` (affine branches only).
    pub fn extended_inverse_pl(&self) -> Option<PlFunction> {
        let (hmin, hmax) = self.image_exact()?;
        let mut xs = vec![Q::zero()];
        for k in [hmin, hmax, rational::qi(1)] {
            if k > *xs.last().unwrap() {
                xs.push(k);
            }
        }
        let ys = xs.iter().map(|x| self.extended_inverse_exact(x).unwrap()).collect();
        PlFunction::new(xs, ys).ok()
    }

    /// The same form restricted to a subinterval of the domain.
    pub fn restricted(&self, lo: Q, hi: Q) -> Result<Branch> {
        if lo < self.domain.lo || hi > self.domain.hi {
            return Err(Error::Structural("restriction leaves the branch domain".into()));
        }
        let b = Branch::new(Interval::new(lo, hi)?, self.form.clone())?;
        if b.monotonicity != self.monotonicity {
            return Err(Error::Structural("restriction changed monotonicity".into()));
        }
        Ok(b)
    }
}
