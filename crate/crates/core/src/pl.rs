//! Continuous piecewise-linear functions with rational knots.
//!
//! These carry every exact computation in the crate: distribution functions
//! of step densities, extended inverses of affine branches, and the selection
//! branches assembled when all inputs are piecewise linear.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, to_f64, Q};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlRepr", into = "PlRepr")]
pub struct PlFunction {
    xs: Vec<Q>,
    ys: Vec<Q>,
    xf: Vec<f64>,
    yf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PlRepr {
    #[serde(with = "rational::serde_q::vec")]
    knots: Vec<Q>,
    #[serde(with = "rational::serde_q::vec")]
    values: Vec<Q>,
}

impl TryFrom<PlRepr> for PlFunction {
    type Error = Error;
    fn try_from(r: PlRepr) -> Result<Self> {
        PlFunction::new(r.knots, r.values)
    }
}

impl From<PlFunction> for PlRepr {
    fn from(f: PlFunction) -> Self {
        PlRepr { knots: f.xs, values: f.ys }
    }
}

impl PlFunction {
    pub fn new(xs: Vec<Q>, ys: Vec<Q>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::Parameter(format!(
                "piecewise linear function needs matching knots and values (got {} and {})",
                xs.len(),
                ys.len()
            )));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("knots must be strictly increasing".into()));
        }
        let xf = xs.iter().map(to_f64).collect();
        let yf = ys.iter().map(to_f64).collect();
        Ok(PlFunction { xs, ys, xf, yf })
    }

    pub fn identity() -> Self {
        PlFunction::new(vec![Q::zero(), rational::qi(1)], vec![Q::zero(), rational::qi(1)]).unwrap()
    }

    pub fn knots(&self) -> &[Q] {
        &self.xs
    }

    pub fn values(&self) -> &[Q] {
        &self.ys
    }

    pub fn knots_f64(&self) -> &[f64] {
        &self.xf
    }

    pub fn values_f64(&self) -> &[f64] {
        &self.yf
    }

    pub fn domain(&self) -> (&Q, &Q) {
        (&self.xs[0], self.xs.last().unwrap())
    }

    pub fn pieces(&self) -> usize {
        self.xs.len() - 1
    }

    /// Index of the piece containing `x`; interior knots belong to the left piece.
    fn piece_of(&self, x: &Q) -> usize {
        let n = self.pieces();
        match self.xs[1..n].binary_search(x) {
            Ok(i) | Err(i) => i,
        }
    }

    fn piece_of_f64(&self, x: f64) -> usize {
        let n = self.pieces();
        self.xf[1..n].partition_point(|k| *k < x)
    }

    /// Exact value; arguments outside the domain are clamped to it.
    pub fn eval(&self, x: &Q) -> Q {
        let (lo, hi) = self.domain();
        if x <= lo {
            return self.ys[0].clone();
        }
        if x >= hi {
            return self.ys.last().unwrap().clone();
        }
        let i = self.piece_of(x);
        let (x0, x1, y0, y1) = (&self.xs[i], &self.xs[i + 1], &self.ys[i], &self.ys[i + 1]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let n = self.pieces();
        if x <= self.xf[0] {
            return self.yf[0];
        }
        if x >= self.xf[n] {
            return self.yf[n];
        }
        let i = self.piece_of_f64(x);
        let (x0, x1, y0, y1) = (self.xf[i], self.xf[i + 1], self.yf[i], self.yf[i + 1]);
        let t = (x - x0) / (x1 - x0);
        y0 + (y1 - y0) * t
    }

    pub fn slopes(&self) -> Vec<Q> {
        (0..self.pieces()).map(|i| (&self.ys[i + 1] - &self.ys[i]) / (&self.xs[i + 1] - &self.xs[i])).collect()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[0] > w[1])
    }

    /// Drops interior knots where the slope does not change.
    pub fn simplified(&self) -> PlFunction {
        let slopes = self.slopes();
        let mut xs = vec![self.xs[0].clone()];
        let mut ys = vec![self.ys[0].clone()];
        for i in 1..self.pieces() {
            if slopes[i] != slopes[i - 1] {
                xs.push(self.xs[i].clone());
                ys.push(self.ys[i].clone());
            }
        }
        xs.push(self.xs.last().unwrap().clone());
        ys.push(self.ys.last().unwrap().clone());
        PlFunction::new(xs, ys).unwrap()
    }

    /// Resamples onto the union of the current knots and `extra` (inside the domain).
    pub fn refined(&self, extra: &[Q]) -> PlFunction {
        let (lo, hi) = self.domain();
        let mut xs: Vec<Q> = self.xs.clone();
        xs.extend(extra.iter().filter(|x| *x > lo && *x < hi).cloned());
        xs.sort();
        xs.dedup();
        let ys = xs.iter().map(|x| self.eval(x)).collect();
        PlFunction::new(xs, ys).unwrap()
    }

    /// `outer ∘ inner`. The range of `inner` must lie in the domain of `outer`.
    pub fn compose(outer: &PlFunction, inner: &PlFunction) -> Result<PlFunction> {
        let (olo, ohi) = outer.domain();
        if inner.ys.iter().any(|y| y < olo || y > ohi) {
            return Err(Error::Parameter("inner range leaves the outer domain".into()));
        }
        let mut xs: Vec<Q> = inner.xs.clone();
        for i in 0..inner.pieces() {
            let (x0, x1, y0, y1) = (&inner.xs[i], &inner.xs[i + 1], &inner.ys[i], &inner.ys[i + 1]);
            if y0 == y1 {
                continue;
            }
            let (ylo, yhi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
            for k in outer.xs.iter().filter(|k| *k > ylo && *k < yhi) {
                xs.push(x0 + (k - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        xs.sort();
        xs.dedup();
        let ys = xs.iter().map(|x| outer.eval(&inner.eval(x))).collect();
        Ok(PlFunction::new(xs, ys)?.simplified())
    }

    /// Inverse of a strictly monotone function.
    pub fn inverse(&self) -> Result<PlFunction> {
        if self.is_strictly_increasing() {
            PlFunction::new(self.ys.clone(), self.xs.clone())
        } else if self.is_strictly_decreasing() {
            let xs = self.ys.iter().rev().cloned().collect();
            let ys = self.xs.iter().rev().cloned().collect();
            PlFunction::new(xs, ys)
        } else {
            Err(Error::NonInvertible(f64::NAN))
        }
    }

    /// `a·f + b·g` on the common domain (the domains must agree).
    pub fn linear_combination(a: &Q, f: &PlFunction, b: &Q, g: &PlFunction) -> Result<PlFunction> {
        if f.domain() != g.domain() {
            return Err(Error::Parameter("linear combination of functions on different domains".into()));
        }
        let mut xs: Vec<Q> = f.xs.iter().chain(g.xs.iter()).cloned().collect();
        xs.sort();
        xs.dedup();
        let ys = xs.iter().map(|x| a * f.eval(x) + b * g.eval(x)).collect();
        Ok(PlFunction::new(xs, ys)?.simplified())
    }

    pub fn map_values(&self, op: impl Fn(&Q) -> Q) -> PlFunction {
        PlFunction::new(self.xs.clone(), self.ys.iter().map(op).collect()).unwrap()
    }

    /// Largest deviation `|self − other|` over the union of knots (exact, since both are linear between).
    pub fn sup_distance(&self, other: &PlFunction) -> (Q, Q) {
        let mut xs: Vec<Q> = self.xs.iter().chain(other.xs.iter()).cloned().collect();
        xs.sort();
        xs.dedup();
        let mut best = (Q::zero(), xs[0].clone());
        for x in xs {
            let d = (self.eval(&x) - other.eval(&x)).abs();
            if d > best.0 {
                best = (d, x);
            }
        }
        best
    }

    /// True when both describe the same function.
    pub fn same_function(&self, other: &PlFunction) -> bool {
        self.domain() == other.domain() && self.sup_distance(other).0.is_zero()
    }
}
