//! Frobenius–Perron operators on step densities (exact) and on distribution
//! functions (pointwise), plus invariance reports.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval_maps::PiecewiseMonotoneMap;
use crate::measures::{DistributionFunction, PiecewiseConstantDensity};
use crate::randmaps::RandomMap;
use crate::rational::{self, to_f64, Q};

/// Default number of grid cells for distribution function comparisons.
pub const DEFAULT_GRID: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub sup_error: f64,
    pub worst_point: f64,
    pub grid_size: usize,
    /// The comparison was carried out in exact arithmetic and found no difference.
    pub exact: bool,
}

fn require_affine_unit(map: &PiecewiseMonotoneMap) -> Result<()> {
    if !map.is_affine() {
        return Err(Error::Unsupported("exact transfer operator needs affine branches; use the Ulam route".into()));
    }
    if !map.is_unit_domain() {
        return Err(Error::Unsupported("transfer operator needs a map on [0, 1]".into()));
    }
    Ok(())
}

/// Pieces `(lo, hi, value)` whose sum is the pushforward of the measure `f`.
fn contributions(map: &PiecewiseMonotoneMap, f: &PiecewiseConstantDensity, out: &mut Vec<(Q, Q, Q)>) {
    for b in map.branches() {
        let d = b.domain();
        let inv_slope = rational::qi(1) / b.slope().unwrap().abs();
        for (k0, k1, c) in f.cells() {
            if c.is_zero() {
                continue;
            }
            let u = rational::max(&d.lo, k0);
            let v = rational::min(&d.hi, k1);
            if u >= v {
                continue;
            }
            let (yu, yv) = (b.eval_exact(&u).unwrap(), b.eval_exact(&v).unwrap());
            let (lo, hi) = if yu < yv { (yu, yv) } else { (yv, yu) };
            out.push((lo, hi, c * &inv_slope));
        }
    }
}

/// Sums interval contributions into a step function on `[0, 1]`.
fn assemble(pieces: &[(Q, Q, Q)]) -> Result<PiecewiseConstantDensity> {
    let mut knots: Vec<Q> = vec![Q::zero(), rational::qi(1)];
    for (lo, hi, _) in pieces {
        knots.push(lo.clone());
        knots.push(hi.clone());
    }
    knots.sort();
    knots.dedup();
    let mut delta = vec![Q::zero(); knots.len()];
    for (lo, hi, v) in pieces {
        let i = knots.binary_search(lo).unwrap();
        let j = knots.binary_search(hi).unwrap();
        delta[i] += v;
        delta[j] -= v;
    }
    let mut values = Vec::with_capacity(knots.len() - 1);
    let mut acc = Q::zero();
    for d in delta.iter().take(knots.len() - 1) {
        acc += d;
        values.push(acc.clone());
    }
    Ok(PiecewiseConstantDensity::measure(knots, values)?.canonical())
}

/// Pushforward of a finite step measure (any total mass).
pub fn transfer_measure(map: &PiecewiseMonotoneMap, f: &PiecewiseConstantDensity) -> Result<PiecewiseConstantDensity> {
    require_affine_unit(map)?;
    let mut pieces = Vec::new();
    contributions(map, f, &mut pieces);
    assemble(&pieces)
}

/// `P f` for an affine map and a step density, exact.
pub fn fp_apply(map: &PiecewiseMonotoneMap, f: &PiecewiseConstantDensity) -> Result<PiecewiseConstantDensity> {
    transfer_measure(map, f)
}

/// `Σ_k P_{τ_k}(p_k f)` for a random map with piecewise constant weights, exact.
pub fn fp_apply_random(rm: &RandomMap, f: &PiecewiseConstantDensity) -> Result<PiecewiseConstantDensity> {
    rm.weights().validate()?;
    let mut pieces = Vec::new();
    for (k, map) in rm.maps().iter().enumerate() {
        require_affine_unit(map)?;
        let weighted = rm.weights().weight_measure(k, f)?;
        contributions(map, &weighted, &mut pieces);
    }
    assemble(&pieces)
}

/// `G(x) = Σ_j [F(right_j(x)) − F(left_j(x))]` built from extended inverses.
pub fn pushforward_value(map: &PiecewiseMonotoneMap, f: &DistributionFunction, x: f64) -> f64 {
    let mut total = 0.0;
    for b in map.branches() {
        let (a, bb) = b.domain_f64();
        let e = b.extended_inverse(x);
        total += if b.is_increasing() { f.eval(e) - f.eval(a) } else { f.eval(bb) - f.eval(e) };
    }
    total
}

fn comparison_points(map: &PiecewiseMonotoneMap, f: &DistributionFunction, grid: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=grid).map(|k| k as f64 / grid as f64).collect();
    xs.extend_from_slice(map.breakpoints_f64());
    for b in map.branches() {
        let (lo, hi) = b.image();
        xs.push(lo);
        xs.push(hi);
    }
    xs.extend(f.knots());
    xs.retain(|x| (0.0..=1.0).contains(x));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Tabulated pushforward of `f` on `grid + 1` points plus all knots.
pub fn cdf_pushforward(map: &PiecewiseMonotoneMap, f: &DistributionFunction, grid: usize) -> Result<DistributionFunction> {
    if !map.is_unit_domain() {
        return Err(Error::Unsupported("pushforward needs a map on [0, 1]".into()));
    }
    let xs = comparison_points(map, f, grid);
    let mut ys = Vec::with_capacity(xs.len());
    let mut running = 0.0f64;
    for &x in &xs {
        running = running.max(pushforward_value(map, f, x).clamp(0.0, 1.0));
        ys.push(running);
    }
    *ys.first_mut().unwrap() = 0.0;
    *ys.last_mut().unwrap() = 1.0;
    DistributionFunction::tabulated(xs, ys)
}

/// Distance between the pushforward of `f` and `f`.
///
/// For affine maps and piecewise linear `f` the comparison is exact.
pub fn check_invariance(map: &PiecewiseMonotoneMap, f: &DistributionFunction, grid: usize) -> Result<InvarianceReport> {
    if !map.is_unit_domain() {
        return Err(Error::Unsupported("invariance check needs a map on [0, 1]".into()));
    }
    if let (true, Some(d)) = (map.is_affine(), f.density()) {
        let pushed = fp_apply(map, &d)?;
        if pushed.same_density(&d) {
            let knots = d.breakpoints().len();
            return Ok(InvarianceReport { sup_error: 0.0, worst_point: 0.0, grid_size: knots, exact: true });
        }
        let g = pushed.cdf();
        let (err, at) = g.sup_distance(&d.cdf());
        let knots = g.knots().len() + d.breakpoints().len();
        return Ok(InvarianceReport { sup_error: to_f64(&err), worst_point: to_f64(&at), grid_size: knots, exact: false });
    }
    let xs = comparison_points(map, f, grid);
    let mut worst = (0.0f64, 0.0f64);
    for &x in &xs {
        let e = (pushforward_value(map, f, x) - f.eval(x)).abs();
        if e > worst.0 {
            worst = (e, x);
        }
    }
    Ok(InvarianceReport { sup_error: worst.0, worst_point: worst.1, grid_size: xs.len(), exact: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn ex_tau1() -> PiecewiseMonotoneMap {
        PiecewiseMonotoneMap::affine(&[
            (qi(0), q(3, 8), q(4, 3), qi(0)),
            (q(3, 8), q(1, 2), qi(4), qi(-1)),
            (q(1, 2), q(5, 8), qi(-4), qi(3)),
            (q(5, 8), qi(1), q(-4, 3), q(4, 3)),
        ])
        .unwrap()
    }

    #[test]
    fn lower_map_pushes_lebesgue_to_first_density() {
        let out = fp_apply(&ex_tau1(), &PiecewiseConstantDensity::uniform()).unwrap();
        assert_eq!(out.breakpoints(), &[qi(0), q(1, 2), qi(1)]);
        assert_eq!(out.values(), &[q(3, 2), q(1, 2)]);
    }

    #[test]
    fn identity_map_is_neutral() {
        let id = PiecewiseMonotoneMap::affine(&[(qi(0), qi(1), qi(1), qi(0))]).unwrap();
        let f = PiecewiseConstantDensity::from_pairs(&[(qi(0), q(1, 3), q(3, 2)), (q(1, 3), qi(1), q(3, 4))]).unwrap();
        assert_eq!(fp_apply(&id, &f).unwrap(), f);
    }

    #[test]
    fn tent_invariance_is_exact() {
        let r = check_invariance(&PiecewiseMonotoneMap::tent(), &DistributionFunction::identity(), 64).unwrap();
        assert!(r.exact);
        assert_eq!(r.sup_error, 0.0);
    }

    #[test]
    fn lower_map_does_not_preserve_lebesgue() {
        let r = check_invariance(&ex_tau1(), &DistributionFunction::identity(), 64).unwrap();
        assert!(!r.exact);
        assert_eq!(r.sup_error, 0.25);
        assert_eq!(r.worst_point, 0.5);
    }

    #[test]
    fn tabulated_pushforward_matches_exact_transfer() {
        let t = ex_tau1();
        let g = cdf_pushforward(&t, &DistributionFunction::identity(), 256).unwrap();
        let exact = fp_apply(&t, &PiecewiseConstantDensity::uniform()).unwrap().cdf();
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            assert!((g.eval(x) - exact.eval_f64(x)).abs() < 1e-10);
        }
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(1.0), 1.0);
    }

    #[test]
    fn non_affine_maps_are_refused() {
        let m = PiecewiseMonotoneMap::tent().conjugate(&DistributionFunction::identity()).unwrap();
        assert!(matches!(fp_apply(&m, &PiecewiseConstantDensity::uniform()), Err(Error::Unsupported(_))));
    }
}
