use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval_maps::PiecewiseMonotoneMap;
use crate::measures::PiecewiseConstantDensity;
use crate::rational::{self, to_f64, Q};

/// Piecewise constant probabilities `p_1, …, p_K` on a common partition of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityWeighting {
    #[serde(with = "rational::serde_q::vec")]
    breakpoints: Vec<Q>,
    /// `values[k][i]` is `p_k` on cell `i`.
    values: Vec<WeightRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
struct WeightRow(#[serde(with = "rational::serde_q::vec")] Vec<Q>);

impl ProbabilityWeighting {
    pub fn new(breakpoints: Vec<Q>, values: Vec<Vec<Q>>) -> Result<Self> {
        let w = ProbabilityWeighting { breakpoints, values: values.into_iter().map(WeightRow).collect() };
        w.validate()?;
        Ok(w)
    }

    /// The same probabilities everywhere.
    pub fn constant(ps: &[Q]) -> Result<Self> {
        Self::new(vec![Q::zero(), Q::one()], ps.iter().map(|p| vec![p.clone()]).collect())
    }

    /// `p_k ≡ 1` for the given index, zero for the others.
    pub fn only(count: usize, k: usize) -> Result<Self> {
        let ps: Vec<Q> = (0..count).map(|j| if j == k { Q::one() } else { Q::zero() }).collect();
        Self::constant(&ps)
    }

    /// Two maps with `p_1 = p` and `p_2 = 1 − p` for a step function `p`.
    pub fn two(p: &PiecewiseConstantDensity) -> Result<Self> {
        let first = p.values().to_vec();
        let second = first.iter().map(|v| Q::one() - v).collect();
        Self::new(p.breakpoints().to_vec(), vec![first, second])
    }

    /// Checks `0 ≤ p_k ≤ 1` and `Σ_k p_k = 1` on every cell, exactly.
    pub fn validate(&self) -> Result<()> {
        let cells = self.breakpoints.len().saturating_sub(1);
        if cells == 0 || !self.breakpoints[0].is_zero() || !self.breakpoints[cells].is_one() {
            return Err(Error::Parameter("weights must be defined on [0, 1]".into()));
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("weight knots must be strictly increasing".into()));
        }
        if self.values.is_empty() || self.values.iter().any(|r| r.0.len() != cells) {
            return Err(Error::Parameter("every map needs one weight per cell".into()));
        }
        for i in 0..cells {
            let mut total = Q::zero();
            for row in &self.values {
                let p = &row.0[i];
                if p.is_negative() || *p > Q::one() {
                    return Err(Error::Parameter(format!("weight {} outside [0, 1]", rational::format_q(p))));
                }
                total += p;
            }
            if !total.is_one() {
                return Err(Error::Parameter(format!(
                    "weights sum to {} on [{}, {}]",
                    rational::format_q(&total),
                    rational::format_q(&self.breakpoints[i]),
                    rational::format_q(&self.breakpoints[i + 1])
                )));
            }
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    pub fn values(&self, k: usize) -> &[Q] {
        &self.values[k].0
    }

    /// `p_k` as a step function (a measure, generally not of mass one).
    pub fn as_step(&self, k: usize) -> Result<PiecewiseConstantDensity> {
        PiecewiseConstantDensity::measure(self.breakpoints.clone(), self.values[k].0.clone())
    }

    /// `p_k(x)`; at a knot the cell to the right is used.
    pub fn value(&self, k: usize, x: f64) -> f64 {
        let n = self.breakpoints.len() - 1;
        let i = self.breakpoints[1..n].partition_point(|b| to_f64(b) <= x);
        to_f64(&self.values[k].0[i])
    }

    /// The measure `p_k · f`.
    pub fn weight_measure(&self, k: usize, f: &PiecewiseConstantDensity) -> Result<PiecewiseConstantDensity> {
        let mut knots: Vec<Q> = self.breakpoints.iter().chain(f.breakpoints()).cloned().collect();
        knots.sort();
        knots.dedup();
        let p = self.as_step(k)?;
        let values = knots
            .windows(2)
            .map(|w| {
                let mid = (&w[0] + &w[1]) / rational::qi(2);
                p.eval(&mid) * f.eval(&mid)
            })
            .collect();
        Ok(PiecewiseConstantDensity::measure(knots, values)?.canonical())
    }
}

/// Maps `τ_1, …, τ_K` applied with position dependent probabilities.
#[derive(Debug, Clone)]
pub struct RandomMap {
    maps: Vec<PiecewiseMonotoneMap>,
    weights: ProbabilityWeighting,
}

impl RandomMap {
    pub fn new(maps: Vec<PiecewiseMonotoneMap>, weights: ProbabilityWeighting) -> Result<Self> {
        if maps.len() != weights.count() {
            return Err(Error::Parameter(format!("{} maps but {} weights", maps.len(), weights.count())));
        }
        if maps.iter().any(|m| !m.is_unit_domain()) {
            return Err(Error::Parameter("random maps need maps on [0, 1]".into()));
        }
        weights.validate()?;
        Ok(RandomMap { maps, weights })
    }

    pub fn maps(&self) -> &[PiecewiseMonotoneMap] {
        &self.maps
    }

    pub fn weights(&self) -> &ProbabilityWeighting {
        &self.weights
    }
}

/// `p_k = a_k f_k / Σ_j a_j f_j` on the common refinement of the densities.
///
/// Where every density vanishes the ratio is `0/0`; those cells get equal
/// weights `1/K` so the probabilities still sum to one.
pub fn bgr_probabilities(densities: &[PiecewiseConstantDensity], a: &[Q]) -> Result<ProbabilityWeighting> {
    if densities.is_empty() || densities.len() != a.len() {
        return Err(Error::Parameter("need one coefficient per density".into()));
    }
    if a.iter().any(|x| x.is_negative()) {
        return Err(Error::Parameter("coefficients must be nonnegative".into()));
    }
    let mut knots: Vec<Q> = densities.iter().flat_map(|d| d.breakpoints().iter().cloned()).collect();
    knots.sort();
    knots.dedup();
    let k = densities.len();
    let mut values = vec![Vec::with_capacity(knots.len() - 1); k];
    for w in knots.windows(2) {
        let mid = (&w[0] + &w[1]) / rational::qi(2);
        let terms: Vec<Q> = densities.iter().zip(a).map(|(d, ak)| ak * d.eval(&mid)).collect();
        let total: Q = terms.iter().sum();
        for (row, t) in values.iter_mut().zip(terms) {
            row.push(if total.is_zero() { rational::q(1, k as i64) } else { t / &total });
        }
    }
    let w = ProbabilityWeighting::new(knots, values)?;
    Ok(merge_equal_cells(&w))
}

fn merge_equal_cells(w: &ProbabilityWeighting) -> ProbabilityWeighting {
    let k = w.count();
    let mut bps = vec![w.breakpoints[0].clone()];
    let mut rows: Vec<Vec<Q>> = vec![Vec::new(); k];
    for i in 0..w.breakpoints.len() - 1 {
        let same = !rows[0].is_empty() && (0..k).all(|j| rows[j].last() == Some(&w.values[j].0[i]));
        if same {
            *bps.last_mut().unwrap() = w.breakpoints[i + 1].clone();
        } else {
            for (j, row) in rows.iter_mut().enumerate() {
                row.push(w.values[j].0[i].clone());
            }
            bps.push(w.breakpoints[i + 1].clone());
        }
    }
    ProbabilityWeighting { breakpoints: bps, values: rows.into_iter().map(WeightRow).collect() }
}
