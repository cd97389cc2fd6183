use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pl::PlFunction;
use crate::rational::{self, to_f64, Q};

/// A step function `Σ cᵢ χ_[aᵢ₋₁, aᵢ]` on `[0, 1]` with rational knots and values.
///
/// Values on the knots themselves are immaterial; lookups at an interior knot
/// use the cell to its right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantDensity {
    #[serde(with = "rational::serde_q::vec")]
    breakpoints: Vec<Q>,
    #[serde(with = "rational::serde_q::vec")]
    values: Vec<Q>,
}

impl PiecewiseConstantDensity {
    /// A probability density; the total mass must be exactly one.
    pub fn new(breakpoints: Vec<Q>, values: Vec<Q>) -> Result<Self> {
        let d = Self::measure(breakpoints, values)?;
        if !d.mass().is_one() {
            return Err(Error::Parameter(format!("density integrates to {} instead of 1", rational::format_q(&d.mass()))));
        }
        Ok(d)
    }

    /// A finite nonnegative step function of any mass.
    pub fn measure(breakpoints: Vec<Q>, values: Vec<Q>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::Parameter("need one value per cell".into()));
        }
        if !breakpoints[0].is_zero() || !breakpoints.last().unwrap().is_one() {
            return Err(Error::Parameter("density must be defined on [0, 1]".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("density knots must be strictly increasing".into()));
        }
        if values.iter().any(|v| v.is_negative()) {
            return Err(Error::Parameter("density values must be nonnegative".into()));
        }
        Ok(PiecewiseConstantDensity { breakpoints, values })
    }

    pub fn uniform() -> Self {
        Self::new(vec![Q::zero(), Q::one()], vec![Q::one()]).unwrap()
    }

    /// Step density from contiguous `(lo, hi, value)` cells.
    pub fn from_pairs(cells: &[(Q, Q, Q)]) -> Result<Self> {
        let mut bps = vec![cells[0].0.clone()];
        let mut vals = Vec::new();
        for (lo, hi, v) in cells {
            if bps.last() != Some(lo) {
                return Err(Error::Parameter("cells must be contiguous".into()));
            }
            bps.push(hi.clone());
            vals.push(v.clone());
        }
        Self::new(bps, vals)
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Q, &Q, &Q)> {
        self.values.iter().enumerate().map(move |(i, v)| (&self.breakpoints[i], &self.breakpoints[i + 1], v))
    }

    fn cell_of(&self, x: &Q) -> usize {
        let n = self.values.len();
        match self.breakpoints[1..n].binary_search(x) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.values[self.cell_of(x)].clone()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let n = self.values.len();
        let i = self.breakpoints[1..n].partition_point(|k| to_f64(k) <= x);
        to_f64(&self.values[i])
    }

    pub fn mass(&self) -> Q {
        self.cells().map(|(a, b, v)| (b - a) * v).sum()
    }

    /// Distribution function `x ↦ ∫₀ˣ f`, exact.
    pub fn cdf(&self) -> PlFunction {
        let mut ys = vec![Q::zero()];
        for (a, b, v) in self.cells() {
            let next = ys.last().unwrap() + (b - a) * v;
            ys.push(next);
        }
        PlFunction::new(self.breakpoints.clone(), ys).unwrap()
    }

    /// Step density with the derivative of `cdf` as values.
    pub fn from_cdf(cdf: &PlFunction) -> Result<Self> {
        let slopes = cdf.slopes();
        Self::measure(cdf.knots().to_vec(), slopes)
    }

    /// Same function with redundant knots removed.
    pub fn canonical(&self) -> Self {
        let mut bps = vec![self.breakpoints[0].clone()];
        let mut vals: Vec<Q> = Vec::new();
        for (_, b, v) in self.cells() {
            if vals.last() == Some(v) {
                *bps.last_mut().unwrap() = b.clone();
            } else {
                vals.push(v.clone());
                bps.push(b.clone());
            }
        }
        PiecewiseConstantDensity { breakpoints: bps, values: vals }
    }

    pub fn same_density(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }

    /// Common-refinement values of `self` and `other` at each cell midpoint.
    fn zip_cells<'a>(&'a self, other: &'a Self) -> impl Iterator<Item = (Q, Q, Q, Q)> + 'a {
        let mut knots: Vec<Q> = self.breakpoints.iter().chain(other.breakpoints.iter()).cloned().collect();
        knots.sort();
        knots.dedup();
        (0..knots.len() - 1).map(move |i| {
            let mid = (&knots[i] + &knots[i + 1]) / rational::qi(2);
            (knots[i].clone(), knots[i + 1].clone(), self.eval(&mid), other.eval(&mid))
        })
    }

    pub fn l1_distance(&self, other: &Self) -> Q {
        self.zip_cells(other).map(|(a, b, u, v)| (b - a) * (u - v).abs()).sum()
    }

    pub fn l1_distance_f64(&self, other: &Self) -> f64 {
        self.zip_cells(other).map(|(a, b, u, v)| to_f64(&(b - a)) * (to_f64(&u) - to_f64(&v)).abs()).sum()
    }

    /// Largest pointwise difference `|self − other|` and a cell midpoint where it is attained.
    pub fn sup_distance(&self, other: &Self) -> (Q, Q) {
        let mut best = (Q::zero(), Q::zero());
        for (a, b, u, v) in self.zip_cells(other) {
            let d = (u - v).abs();
            if d > best.0 || (best.0.is_zero() && best.1.is_zero()) {
                best = (d, (a + b) / rational::qi(2));
            }
        }
        best
    }

    /// `a·self + b·other` as a measure.
    pub fn combine(&self, a: &Q, other: &Self, b: &Q) -> Result<Self> {
        let mut bps = vec![Q::zero()];
        let mut vals = Vec::new();
        for (_, hi, u, v) in self.zip_cells(other) {
            vals.push(a * u + b * v);
            bps.push(hi);
        }
        Self::measure(bps, vals).map(|d| d.canonical())
    }

    pub fn normalized(&self) -> Result<Self> {
        let m = self.mass();
        if m.is_zero() {
            return Err(Error::Parameter("cannot normalise a zero measure".into()));
        }
        Self::new(self.breakpoints.clone(), self.values.iter().map(|v| v / &m).collect())
    }

    /// Values of the density on the cells of a coarser partition, if it is constant on each.
    pub fn values_on(&self, partition: &[Q]) -> Option<Vec<Q>> {
        partition
            .windows(2)
            .map(|w| {
                let inside: Vec<&Q> = self.cells().filter(|(a, b, _)| *a < &w[1] && *b > &w[0]).map(|(_, _, v)| v).collect();
                let first = inside.first()?;
                inside.iter().all(|v| v == first).then(|| (*first).clone())
            })
            .collect()
    }

    /// Samples `(x, f(x))` on `n + 1` equispaced points, for export.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        (0..=n)
            .map(|i| {
                let x = i as f64 / n as f64;
                (x, self.eval_f64(x))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn f1() -> PiecewiseConstantDensity {
        PiecewiseConstantDensity::new(vec![qi(0), q(1, 2), qi(1)], vec![q(3, 2), q(1, 2)]).unwrap()
    }

    #[test]
    fn cdf_of_first_invariant_density() {
        let cdf = f1().cdf();
        assert_eq!(cdf.eval(&q(1, 2)), q(3, 4));
        assert_eq!(cdf.eval(&q(3, 4)), q(3, 4) + q(1, 2) * q(1, 4));
        assert_eq!(cdf.eval(&qi(1)), qi(1));
        assert!(PiecewiseConstantDensity::uniform().cdf().same_function(&PlFunction::identity()));
    }

    #[test]
    fn rejects_bad_mass_and_negative_values() {
        assert!(PiecewiseConstantDensity::new(vec![qi(0), qi(1)], vec![qi(2)]).is_err());
        assert!(PiecewiseConstantDensity::measure(vec![qi(0), qi(1)], vec![qi(-1)]).is_err());
        assert!(PiecewiseConstantDensity::measure(vec![qi(0), q(1, 2), q(1, 2), qi(1)], vec![qi(1); 3]).is_err());
    }

    #[test]
    fn canonical_merges_equal_cells() {
        let d = PiecewiseConstantDensity::new(vec![qi(0), q(1, 4), q(1, 2), qi(1)], vec![qi(1); 3]).unwrap();
        assert_eq!(d.canonical(), PiecewiseConstantDensity::uniform());
        assert!(d.same_density(&PiecewiseConstantDensity::uniform()));
    }

    #[test]
    fn lookups_at_knots_use_right_cell() {
        assert_eq!(f1().eval(&q(1, 2)), q(1, 2));
        assert_eq!(f1().eval(&qi(1)), q(1, 2));
        assert_eq!(f1().eval_f64(0.5), 0.5);
        assert_eq!(f1().eval_f64(0.25), 1.5);
    }

    #[test]
    fn combination_and_distances() {
        let f2 = PiecewiseConstantDensity::new(vec![qi(0), q(1, 2), qi(1)], vec![q(2, 3), q(4, 3)]).unwrap();
        let mix = f1().combine(&q(2, 5), &f2, &q(3, 5)).unwrap();
        assert_eq!(mix, PiecewiseConstantDensity::uniform());
        assert_eq!(f1().l1_distance(&PiecewiseConstantDensity::uniform()), q(1, 2));
        assert_eq!(f1().sup_distance(&f2).0, q(5, 6));
        assert_eq!(f1().values_on(&[qi(0), q(1, 2), qi(1)]), Some(vec![q(3, 2), q(1, 2)]));
        assert_eq!(f1().values_on(&[qi(0), qi(1)]), None);
    }
}
