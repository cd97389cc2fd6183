use crate::error::{Error, Result};
use crate::interval_maps::PiecewiseMonotoneMap;
use crate::rational::{self, from_f64};

use super::PiecewiseConstantDensity;

const MAX_STEPS: usize = 100_000;
const RESIDUAL: f64 = 1e-12;

/// Stationary vector of an Ulam matrix together with the number of iterations used.
#[derive(Debug, Clone)]
pub struct UlamResult {
    /// Bin probabilities, summing to one.
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl UlamResult {
    /// Density value on each bin.
    pub fn density_values(&self) -> Vec<f64> {
        let n = self.weights.len() as f64;
        self.weights.iter().map(|w| w * n).collect()
    }

    pub fn to_density(&self) -> Result<PiecewiseConstantDensity> {
        let n = self.weights.len();
        let bps = (0..=n).map(|k| rational::q(k as i64, n as i64)).collect();
        let vals = self.density_values().into_iter().map(|v| from_f64(v.max(0.0))).collect();
        PiecewiseConstantDensity::measure(bps, vals)?.normalized()
    }
}

/// Rows of the Ulam matrix over `n` equal bins, as sparse `(column, entry)` lists.
fn ulam_rows(map: &PiecewiseMonotoneMap, n: usize) -> Vec<Vec<(usize, f64)>> {
    let nf = n as f64;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for b in map.branches() {
        let (a, bb) = b.domain_f64();
        let i0 = ((a * nf).floor() as usize).min(n - 1);
        let i1 = ((bb * nf).ceil() as usize).min(n);
        for (i, row) in rows.iter_mut().enumerate().take(i1).skip(i0) {
            let xl = a.max(i as f64 / nf);
            let xr = bb.min((i + 1) as f64 / nf);
            if xr <= xl {
                continue;
            }
            let (u, v) = (b.eval(xl), b.eval(xr));
            let (ylo, yhi) = (u.min(v), u.max(v));
            let j0 = ((ylo * nf).floor() as usize).min(n - 1);
            let j1 = ((yhi * nf).ceil() as usize).clamp(j0 + 1, n);
            for j in j0..j1 {
                let lo = ylo.max(j as f64 / nf);
                let hi = yhi.min((j + 1) as f64 / nf);
                if hi <= lo {
                    continue;
                }
                let (p, q) = (b.extended_inverse(lo), b.extended_inverse(hi));
                let p = p.clamp(xl, xr);
                let q = q.clamp(xl, xr);
                let len = (q - p).abs();
                if len > 0.0 {
                    row.push((j, len * nf));
                }
            }
        }
    }
    for row in rows.iter_mut() {
        row.sort_by_key(|e| e.0);
        let total: f64 = row.iter().map(|e| e.1).sum();
        if total > 0.0 {
            for e in row.iter_mut() {
                e.1 /= total;
            }
        }
    }
    rows
}

/// Power iteration (lazy, so periodic chains converge) on the Ulam matrix.
pub fn ulam_stationary(map: &PiecewiseMonotoneMap, n_bins: usize) -> Result<UlamResult> {
    if n_bins < 2 {
        return Err(Error::Parameter("Ulam's method needs at least two bins".into()));
    }
    if !map.is_unit_domain() {
        return Err(Error::Unsupported("Ulam's method needs a map on [0, 1]".into()));
    }
    let rows = ulam_rows(map, n_bins);
    let mut pi = vec![1.0 / n_bins as f64; n_bins];
    let mut next = vec![0.0; n_bins];
    for step in 1..=MAX_STEPS {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, row) in rows.iter().enumerate() {
            let w = pi[i];
            if w == 0.0 {
                continue;
            }
            for &(j, m) in row {
                next[j] += w * m;
            }
        }
        let mut residual = 0.0;
        let mut total = 0.0;
        for (p, q) in pi.iter_mut().zip(&next) {
            let new = 0.5 * (*p + q);
            residual += (new - *p).abs();
            *p = new;
            total += new;
        }
        pi.iter_mut().for_each(|v| *v /= total);
        if residual <= RESIDUAL {
            return Ok(UlamResult { weights: pi, iterations: step, residual });
        }
    }
    Err(Error::Convergence(MAX_STEPS))
}

/// Ulam approximation of the invariant density with `n_bins` equal bins.
pub fn ulam_approximation(map: &PiecewiseMonotoneMap, n_bins: usize) -> Result<PiecewiseConstantDensity> {
    ulam_stationary(map, n_bins)?.to_density()
}
