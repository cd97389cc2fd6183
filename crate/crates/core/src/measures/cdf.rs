use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pl::PlFunction;
use crate::rational::{self, to_f64, Q};

use super::PiecewiseConstantDensity;

const BISECTION_MAX_ITER: usize = 200;
const FLAT_LEVEL_TOL: f64 = 1e-15;

/// A closed-form monotone curve on one segment of a distribution function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "curve", rename_all = "snake_case")]
pub enum Curve {
    /// `a x² + b x + c`.
    Quadratic { a: f64, b: f64, c: f64 },
    /// The inverse of `y ↦ a y² + b y + c` restricted to `y ∈ [y_lo, y_hi]`.
    InverseQuadratic { a: f64, b: f64, c: f64, y_lo: f64, y_hi: f64 },
}

/// Root of `a t² + b t + c = v` closest to `[lo, hi]`.
pub(crate) fn quadratic_root(a: f64, b: f64, c: f64, v: f64, lo: f64, hi: f64) -> f64 {
    let c = c - v;
    if a == 0.0 {
        return -c / b;
    }
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let sq = disc.sqrt();
    let qq = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
    let mut roots = Vec::with_capacity(2);
    if qq != 0.0 {
        roots.push(qq / a);
        roots.push(c / qq);
    } else {
        roots.push(-b / (2.0 * a));
    }
    let dist = |t: f64| {
        if t < lo {
            lo - t
        } else if t > hi {
            t - hi
        } else {
            0.0
        }
    };
    roots.into_iter().min_by(|s, t| dist(*s).total_cmp(&dist(*t))).unwrap().clamp(lo.min(hi), hi.max(lo))
}

impl Curve {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            Curve::Quadratic { a, b, c } => (a * x + b) * x + c,
            Curve::InverseQuadratic { a, b, c, y_lo, y_hi } => quadratic_root(a, b, c, x, y_lo, y_hi),
        }
    }

    fn invert(&self, u: f64, lo: f64, hi: f64) -> f64 {
        match *self {
            Curve::Quadratic { a, b, c } => quadratic_root(a, b, c, u, lo, hi),
            Curve::InverseQuadratic { a, b, c, .. } => ((a * u + b) * u + c).clamp(lo, hi),
        }
    }

    fn is_constant(&self) -> bool {
        matches!(*self, Curve::Quadratic { a, b, .. } if a == 0.0 && b == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSegment {
    pub lo: f64,
    pub hi: f64,
    #[serde(flatten)]
    pub curve: Curve,
}

/// One cell of a [`DistributionFunction::Cellwise`]: on `[lo, hi]` the value is
/// `offset + scale · (base(x) − base(lo))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineCell {
    pub lo: f64,
    pub hi: f64,
    pub offset: f64,
    pub scale: f64,
}

/// A distribution function on `[0, 1]`: `F(0) = 0`, `F(1) = 1`, nondecreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionFunction {
    /// Exact piecewise linear, e.g. the distribution function of a step density.
    Linear { function: PlFunction },
    /// Degree two segments, or inverses of them, each with a closed-form inverse.
    Curved { segments: Vec<CurveSegment> },
    /// Monotone table with linear interpolation.
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
    /// `weight · first + (1 − weight) · second`.
    Mix {
        first: Box<DistributionFunction>,
        second: Box<DistributionFunction>,
        #[serde(with = "rational::serde_q")]
        weight: Q,
    },
    /// Cell-by-cell affine rescaling of another function.
    Cellwise { base: Box<DistributionFunction>, cells: Vec<AffineCell> },
}

impl DistributionFunction {
    pub fn identity() -> Self {
        DistributionFunction::Linear { function: PlFunction::identity() }
    }

    pub fn linear(function: PlFunction) -> Result<Self> {
        let f = DistributionFunction::Linear { function };
        f.validate()?;
        Ok(f)
    }

    pub fn from_density(f: &PiecewiseConstantDensity) -> Self {
        DistributionFunction::Linear { function: f.cdf() }
    }

    pub fn curved(segments: Vec<CurveSegment>) -> Result<Self> {
        let f = DistributionFunction::Curved { segments };
        f.validate()?;
        Ok(f)
    }

    pub fn tabulated(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let f = DistributionFunction::Tabulated { xs, ys };
        f.validate()?;
        Ok(f)
    }

    /// `λ·first + (1 − λ)·second`, `0 < λ < 1`.
    pub fn convex_combination(first: &Self, second: &Self, lambda: &Q) -> Result<Self> {
        if *lambda <= rational::qi(0) || *lambda >= rational::qi(1) {
            return Err(Error::Parameter(format!("convex weight {} must lie in (0, 1)", rational::format_q(lambda))));
        }
        Ok(DistributionFunction::Mix { first: Box::new(first.clone()), second: Box::new(second.clone()), weight: lambda.clone() })
    }

    /// Checks the representation: monotone, `F(0) = 0`, `F(1) = 1`.
    pub fn validate(&self) -> Result<()> {
        let tol = 1e-12;
        match self {
            DistributionFunction::Linear { function } => {
                let (lo, hi) = function.domain();
                if *lo != rational::qi(0) || *hi != rational::qi(1) {
                    return Err(Error::Parameter("distribution function must live on [0, 1]".into()));
                }
                if !function.is_nondecreasing() {
                    return Err(Error::Parameter("distribution function must be nondecreasing".into()));
                }
            }
            DistributionFunction::Curved { segments } => {
                if segments.is_empty()
                    || segments[0].lo != 0.0
                    || segments.last().unwrap().hi != 1.0
                    || segments.windows(2).any(|w| w[0].hi != w[1].lo)
                    || segments.iter().any(|s| s.lo >= s.hi)
                {
                    return Err(Error::Parameter("curve segments must tile [0, 1]".into()));
                }
                for s in segments {
                    let n = 32;
                    let vals: Vec<f64> = (0..=n).map(|k| s.curve.eval(s.lo + (s.hi - s.lo) * k as f64 / n as f64)).collect();
                    if vals.windows(2).any(|w| w[1] < w[0] - tol) {
                        return Err(Error::Parameter("curve segment is not nondecreasing".into()));
                    }
                }
                for w in segments.windows(2) {
                    if (w[0].curve.eval(w[0].hi) - w[1].curve.eval(w[1].lo)).abs() > 1e-12 {
                        return Err(Error::Parameter(format!("curve is discontinuous at {}", w[0].hi)));
                    }
                }
            }
            DistributionFunction::Tabulated { xs, ys } => {
                if xs.len() < 2 || xs.len() != ys.len() || xs[0] != 0.0 || *xs.last().unwrap() != 1.0 {
                    return Err(Error::Parameter("table must span [0, 1]".into()));
                }
                if xs.windows(2).any(|w| w[0] >= w[1]) || ys.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::Parameter("table must be monotone".into()));
                }
            }
            DistributionFunction::Mix { first, second, .. } => {
                first.validate()?;
                second.validate()?;
            }
            DistributionFunction::Cellwise { base, cells } => {
                base.validate()?;
                if cells.is_empty() || cells[0].lo != 0.0 || cells.last().unwrap().hi != 1.0 {
                    return Err(Error::Parameter("cells must tile [0, 1]".into()));
                }
                if cells.iter().any(|c| c.scale < 0.0) {
                    return Err(Error::Parameter("cell scales must be nonnegative".into()));
                }
            }
        }
        if self.eval(0.0).abs() > tol || (self.eval(1.0) - 1.0).abs() > tol {
            return Err(Error::Parameter(format!(
                "distribution function must satisfy F(0) = 0 and F(1) = 1 (got {} and {})",
                self.eval(0.0),
                self.eval(1.0)
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            DistributionFunction::Linear { function } => function.eval_f64(x),
            DistributionFunction::Curved { segments } => {
                let i = segments.partition_point(|s| s.hi < x).min(segments.len() - 1);
                segments[i].curve.eval(x)
            }
            DistributionFunction::Tabulated { xs, ys } => {
                let i = xs.partition_point(|k| *k < x).clamp(1, xs.len() - 1);
                let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                ys[i - 1] + t * (ys[i] - ys[i - 1])
            }
            DistributionFunction::Mix { first, second, weight } => {
                let w = to_f64(weight);
                w * first.eval(x) + (1.0 - w) * second.eval(x)
            }
            DistributionFunction::Cellwise { base, cells } => {
                let i = cells.partition_point(|c| c.hi < x).min(cells.len() - 1);
                let c = &cells[i];
                c.offset + c.scale * (base.eval(x) - base.eval(c.lo))
            }
        }
        .clamp(0.0, 1.0)
    }

    /// Intervals `(x_lo, x_hi, level)` of positive length on which the function is constant.
    pub fn flat_intervals(&self) -> Vec<(f64, f64, f64)> {
        match self {
            DistributionFunction::Linear { function } => {
                let xs = function.knots_f64();
                let ys = function.values();
                (0..function.pieces()).filter(|&i| ys[i] == ys[i + 1]).map(|i| (xs[i], xs[i + 1], to_f64(&ys[i]))).collect()
            }
            DistributionFunction::Curved { segments } => {
                segments.iter().filter(|s| s.curve.is_constant()).map(|s| (s.lo, s.hi, s.curve.eval(s.lo))).collect()
            }
            DistributionFunction::Tabulated { xs, ys } => {
                (0..xs.len() - 1).filter(|&i| ys[i] == ys[i + 1]).map(|i| (xs[i], xs[i + 1], ys[i])).collect()
            }
            DistributionFunction::Mix { first, second, .. } => {
                let mut out = Vec::new();
                for (a0, a1, _) in first.flat_intervals() {
                    for (b0, b1, _) in second.flat_intervals() {
                        let (lo, hi) = (a0.max(b0), a1.min(b1));
                        if lo < hi {
                            out.push((lo, hi, self.eval(lo)));
                        }
                    }
                }
                out
            }
            DistributionFunction::Cellwise { base, cells } => {
                let mut out: Vec<(f64, f64, f64)> = cells.iter().filter(|c| c.scale == 0.0).map(|c| (c.lo, c.hi, c.offset)).collect();
                for (lo, hi, _) in base.flat_intervals() {
                    for c in cells.iter().filter(|c| c.scale > 0.0) {
                        let (l, h) = (lo.max(c.lo), hi.min(c.hi));
                        if l < h {
                            out.push((l, h, self.eval(l)));
                        }
                    }
                }
                out
            }
        }
    }

    /// True when the function is a homeomorphism of `[0, 1]`.
    pub fn is_strictly_increasing(&self) -> bool {
        self.flat_intervals().is_empty()
    }

    /// The unique `x` with `F(x) = u`.
    pub fn invert(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Parameter(format!("level {u} outside [0, 1]")));
        }
        if self.flat_intervals().iter().any(|(_, _, level)| (level - u).abs() <= FLAT_LEVEL_TOL) {
            return Err(Error::NonInvertible(u));
        }
        Ok(self.invert_unchecked(u))
    }

    /// Smallest `x` with `F(x) ≥ u`, without the flatness check.
    pub(crate) fn invert_unchecked(&self, u: f64) -> f64 {
        match self {
            DistributionFunction::Linear { function } => {
                let xs = function.knots_f64();
                let ys = function.values_f64();
                let i = ys.partition_point(|y| *y < u).clamp(1, ys.len() - 1);
                if ys[i] == ys[i - 1] {
                    return xs[i - 1];
                }
                let t = (u - ys[i - 1]) / (ys[i] - ys[i - 1]);
                (xs[i - 1] + t * (xs[i] - xs[i - 1])).clamp(xs[i - 1], xs[i])
            }
            DistributionFunction::Curved { segments } => {
                let i = segments.partition_point(|s| s.curve.eval(s.hi) < u).min(segments.len() - 1);
                let s = &segments[i];
                s.curve.invert(u, s.lo, s.hi)
            }
            DistributionFunction::Tabulated { xs, ys } => {
                let i = ys.partition_point(|y| *y < u).clamp(1, ys.len() - 1);
                if ys[i] == ys[i - 1] {
                    return xs[i - 1];
                }
                let t = (u - ys[i - 1]) / (ys[i] - ys[i - 1]);
                xs[i - 1] + t * (xs[i] - xs[i - 1])
            }
            DistributionFunction::Mix { .. } => bisect_nondecreasing(|x| self.eval(x), u, 0.0, 1.0),
            DistributionFunction::Cellwise { base, cells } => {
                let i = cells.partition_point(|c| c.offset + c.scale * (base.eval(c.hi) - base.eval(c.lo)) < u).min(cells.len() - 1);
                let c = &cells[i];
                if c.scale == 0.0 {
                    return c.lo;
                }
                let target = base.eval(c.lo) + (u - c.offset) / c.scale;
                base.invert_unchecked(target.clamp(0.0, 1.0)).clamp(c.lo, c.hi)
            }
        }
    }

    /// Exact piecewise linear form, when every component is piecewise linear.
    pub fn as_linear(&self) -> Option<PlFunction> {
        match self {
            DistributionFunction::Linear { function } => Some(function.clone()),
            DistributionFunction::Mix { first, second, weight } => {
                let f = first.as_linear()?;
                let g = second.as_linear()?;
                PlFunction::linear_combination(weight, &f, &(rational::qi(1) - weight), &g).ok()
            }
            _ => None,
        }
    }

    /// Step density, when the function is exactly piecewise linear.
    pub fn density(&self) -> Option<PiecewiseConstantDensity> {
        PiecewiseConstantDensity::from_cdf(&self.as_linear()?).ok()
    }

    /// Points where the function may fail to be smooth.
    pub fn knots(&self) -> Vec<f64> {
        let mut out = match self {
            DistributionFunction::Linear { function } => function.knots_f64().to_vec(),
            DistributionFunction::Curved { segments } => segments.iter().flat_map(|s| [s.lo, s.hi]).collect(),
            DistributionFunction::Tabulated { xs, .. } => xs.clone(),
            DistributionFunction::Mix { first, second, .. } => first.knots().into_iter().chain(second.knots()).collect(),
            DistributionFunction::Cellwise { base, cells } => {
                base.knots().into_iter().chain(cells.iter().flat_map(|c| [c.lo, c.hi])).collect()
            }
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Smallest `x ∈ [lo, hi]` with `f(x) ≥ u` for nondecreasing `f`, to machine precision.
pub(crate) fn bisect_nondecreasing(f: impl Fn(f64) -> f64, u: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    if f(a) >= u {
        return a;
    }
    for _ in 0..BISECTION_MAX_ITER {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) >= u {
            b = m;
        } else {
            a = m;
        }
    }
    b
}
