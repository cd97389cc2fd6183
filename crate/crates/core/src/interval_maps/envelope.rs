use crate::error::{Error, Result};

use super::map::{common_refinement, PiecewiseMonotoneMap};

/// Default number of grid cells for envelope and betweenness checks.
pub const DEFAULT_GRID: usize = 1 << 14;
/// Tolerance for the grid ordering check.
pub const ORDER_TOL: f64 = 1e-12;

/// Largest amount by which the lower map exceeds the upper map.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OrderViolation {
    pub piece: usize,
    pub at: f64,
    pub excess: f64,
}

/// A lower map `tau1` and an upper map `tau2` on one breakpoint sequence, with
/// matching monotonicity on every piece.
#[derive(Debug, Clone)]
pub struct Envelope {
    tau1: PiecewiseMonotoneMap,
    tau2: PiecewiseMonotoneMap,
    crossing: Option<OrderViolation>,
}

impl Envelope {
    pub fn tau1(&self) -> &PiecewiseMonotoneMap {
        &self.tau1
    }

    pub fn tau2(&self) -> &PiecewiseMonotoneMap {
        &self.tau2
    }

    pub fn pieces(&self) -> usize {
        self.tau1.branches().len()
    }

    pub fn is_affine(&self) -> bool {
        self.tau1.is_affine() && self.tau2.is_affine()
    }

    /// Where the lower map rises above the upper one, for envelopes built with
    /// [`envelope_allowing_crossings`].
    pub fn crossing(&self) -> Option<&OrderViolation> {
        self.crossing.as_ref()
    }
}

/// Checks `tau1 ≤ tau2` and per-piece monotonicity after common refinement.
pub fn validate_envelope(tau1: &PiecewiseMonotoneMap, tau2: &PiecewiseMonotoneMap) -> Result<Envelope> {
    validate_envelope_on(tau1, tau2, DEFAULT_GRID)
}

pub fn validate_envelope_on(tau1: &PiecewiseMonotoneMap, tau2: &PiecewiseMonotoneMap, grid: usize) -> Result<Envelope> {
    let env = envelope_allowing_crossings(tau1, tau2, grid)?;
    if let Some(v) = &env.crossing {
        return Err(Error::Envelope { piece: v.piece, reason: format!("lower map exceeds upper map at {} by {}", v.at, v.excess) });
    }
    Ok(env)
}

/// As [`validate_envelope_on`], but an ordering failure is recorded in the
/// envelope instead of being an error. Monotonicity must still match.
pub fn envelope_allowing_crossings(tau1: &PiecewiseMonotoneMap, tau2: &PiecewiseMonotoneMap, grid: usize) -> Result<Envelope> {
    let (t1, t2) = common_refinement(tau1, tau2)?;
    let mut worst: Option<OrderViolation> = None;
    let mut note = |piece: usize, at: f64, excess: f64| {
        if excess > 0.0 && worst.as_ref().is_none_or(|w| excess > w.excess) {
            worst = Some(OrderViolation { piece, at, excess });
        }
    };
    for (j, (b1, b2)) in t1.branches().iter().zip(t2.branches()).enumerate() {
        if b1.monotonicity() != b2.monotonicity() {
            return Err(Error::Envelope {
                piece: j,
                reason: format!("lower branch is {:?} but upper branch is {:?}", b1.monotonicity(), b2.monotonicity()),
            });
        }
        for x in [&b1.domain().lo, &b1.domain().hi] {
            let xf = crate::rational::to_f64(x);
            match (b1.eval_exact(x), b2.eval_exact(x)) {
                (Some(u), Some(v)) if u > v => note(j, xf, crate::rational::to_f64(&(u - v)).max(f64::MIN_POSITIVE)),
                (Some(_), Some(_)) => {}
                _ => note(j, xf, b1.eval(xf) - b2.eval(xf) - ORDER_TOL),
            }
        }
    }
    let d = t1.domain();
    let (lo, hi) = (d.lo_f64(), d.hi_f64());
    for k in 0..=grid {
        let x = lo + (hi - lo) * k as f64 / grid as f64;
        let j = t1.branch_index(x);
        let (u, v) = (t1.branches()[j].eval(x), t2.branches()[j].eval(x));
        if u > v + ORDER_TOL {
            note(j, x, u - v);
        }
    }
    Ok(Envelope { tau1: t1, tau2: t2, crossing: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn ordering_and_monotonicity_errors_name_the_piece() {
        let low = PiecewiseMonotoneMap::affine(&[(qi(0), q(1, 2), qi(1), qi(0)), (q(1, 2), qi(1), qi(-1), qi(1))]).unwrap();
        let tent = PiecewiseMonotoneMap::tent();
        assert!(validate_envelope(&low, &tent).is_ok());
        match validate_envelope(&tent, &low) {
            Err(Error::Envelope { piece, .. }) => assert_eq!(piece, 0),
            other => panic!("unexpected {other:?}"),
        }
        let rising = PiecewiseMonotoneMap::affine(&[(qi(0), qi(1), qi(1), qi(0))]).unwrap();
        assert!(matches!(validate_envelope(&rising, &tent), Err(Error::Envelope { piece: 1, .. })));
        let crossed = envelope_allowing_crossings(&tent, &low, 64).unwrap();
        assert_eq!(crossed.crossing().unwrap().at, 0.5);
        assert_eq!(crossed.crossing().unwrap().excess, 0.5);
        assert!(envelope_allowing_crossings(&rising, &tent, 64).is_err());
    }
}
