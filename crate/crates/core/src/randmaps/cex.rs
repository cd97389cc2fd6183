use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::examples::registry;
use crate::interval_maps::{Branch, BranchForm, Interval, PiecewiseMonotoneMap};
use crate::measures::PiecewiseConstantDensity;
use crate::rational::{self, q, qi, to_f64, Q};
use crate::transfer::fp_apply_random;

use super::report::{CexEquation, FeasibilityReport, Verdict, Witness};
use super::{ProbabilityWeighting, RandomMap};

/// `τ₂⁻¹ ∘ τ₁` on the first fifth of the interval, for the built-in semi-Markov pair.
pub fn tau21() -> Result<PiecewiseMonotoneMap> {
    let fifth = q(1, 5);
    let lower = registry::sec6_tau1().restrict(&qi(0), &fifth)?;
    let upper = registry::sec6_tau2().restrict(&qi(0), &fifth)?;
    let map = PiecewiseMonotoneMap::compose(&upper.inverse()?, &lower)?;
    let expected = PiecewiseMonotoneMap::affine(&[
        (qi(0), q(3, 20), q(1, 12), qi(0)),
        (q(3, 20), q(15, 80), qi(1), q(-11, 80)),
        (q(15, 80), fifth, qi(12), q(-11, 5)),
    ])?;
    let same = map.breakpoints() == expected.breakpoints()
        && map
            .branches()
            .iter()
            .zip(expected.branches())
            .all(|(a, b)| a.slope() == b.slope() && a.eval_exact(&a.domain().lo) == b.eval_exact(&b.domain().lo));
    if !same {
        return Err(Error::Assertion("composed map differs from its closed form".into()));
    }
    Ok(map)
}

fn affine_parts(b: &Branch) -> (Q, Q) {
    match b.form() {
        BranchForm::Affine { slope, intercept } => (slope.clone(), intercept.clone()),
        _ => unreachable!("checked affine"),
    }
}

/// Smallest common breakpoint beyond which the two maps agree, but no smaller
/// than the first positive breakpoint of `tau1`.
fn region_end(tau1: &PiecewiseMonotoneMap, tau2: &PiecewiseMonotoneMap) -> Result<Q> {
    let (r1, r2) = crate::interval_maps::common_refinement(tau1, tau2)?;
    let mut end = qi(1);
    for (a, b) in r1.branches().iter().zip(r2.branches()).rev() {
        if affine_parts(a) != affine_parts(b) {
            break;
        }
        end = a.domain().lo.clone();
    }
    Ok(rational::max(&end, &tau1.breakpoints()[1]))
}

fn image_interval(b: &Branch, u: &Q, v: &Q) -> Result<Interval> {
    let a = b.extended_inverse_exact(u).unwrap();
    let c = b.extended_inverse_exact(v).unwrap();
    if a <= c {
        Interval::new(a, c)
    } else {
        Interval::new(c, a)
    }
}

fn covering<'a>(branches: &'a [Branch], m: &Q) -> Vec<&'a Branch> {
    branches
        .iter()
        .filter(|b| {
            let (lo, hi) = b.image_exact().unwrap();
            lo < *m && *m < hi
        })
        .collect()
}

/// Invariance equations of Lebesgue measure for the random map `(τ₁, τ₂; p₁, 1 − p₁)`
/// where `p₁` is unknown on the region in which the maps differ.
pub fn derive_cex_equations(tau1: &PiecewiseMonotoneMap, tau2: &PiecewiseMonotoneMap) -> Result<Vec<CexEquation>> {
    if !tau1.is_affine() || !tau2.is_affine() {
        return Err(Error::Unsupported("the derivation needs affine maps".into()));
    }
    if !tau1.is_unit_domain() || !tau2.is_unit_domain() {
        return Err(Error::Unsupported("the derivation needs maps on [0, 1]".into()));
    }
    let end = region_end(tau1, tau2)?;
    let lower = tau1.restrict(&qi(0), &end)?.merged();
    let upper = tau2.restrict(&qi(0), &end)?.merged();
    let shared: Vec<Branch> = if end < qi(1) { tau1.restrict(&end, &qi(1))?.branches().to_vec() } else { Vec::new() };

    let mut atoms: Vec<Q> = vec![qi(0), qi(1)];
    for b in lower.branches().iter().chain(upper.branches()).chain(&shared) {
        let (lo, hi) = b.image_exact().unwrap();
        atoms.push(lo);
        atoms.push(hi);
    }
    atoms.sort();
    atoms.dedup();

    let mut out = Vec::new();
    for w in atoms.windows(2) {
        let (u, v) = (&w[0], &w[1]);
        let mid = (u + v) / qi(2);
        let mut remainder = Q::one();
        for b in covering(&shared, &mid) {
            remainder -= Q::one() / b.slope().unwrap().abs();
        }
        let phi = covering(lower.branches(), &mid);
        let psi = covering(upper.branches(), &mid);
        if phi.len() > 1 || psi.len() > 1 {
            return Err(Error::Unsupported("an atom is covered by several branches of one map".into()));
        }
        let atom = Interval::new(u.clone(), v.clone())?;
        let eq = match (phi.first(), psi.first()) {
            (Some(f), Some(g)) => {
                let sf = f.slope().unwrap().abs();
                let sg = g.slope().unwrap().abs();
                let constant = &sf * &remainder - &sf / &sg;
                let coefficient = &sf / &sg;
                let y_interval = image_interval(f, u, v)?;
                let image = image_interval(g, u, v)?;
                let identity = coefficient.is_one() && y_interval == image;
                let feasible =
                    if identity { constant.is_zero() } else { constant <= Q::one() && !(&constant + &coefficient).is_negative() };
                CexEquation {
                    atom,
                    lower_slope: Some(sf),
                    upper_slope: Some(sg),
                    remainder,
                    constant,
                    coefficient,
                    y_interval,
                    image_interval: image,
                    feasible,
                }
            }
            (Some(f), None) => {
                let sf = f.slope().unwrap().abs();
                let constant = &sf * &remainder;
                let y_interval = image_interval(f, u, v)?;
                let feasible = !constant.is_negative() && constant <= Q::one();
                CexEquation {
                    atom,
                    lower_slope: Some(sf),
                    upper_slope: None,
                    remainder,
                    constant,
                    coefficient: Q::zero(),
                    image_interval: y_interval.clone(),
                    y_interval,
                    feasible,
                }
            }
            (None, Some(g)) => {
                let sg = g.slope().unwrap().abs();
                let constant = Q::one() - &sg * &remainder;
                let y_interval = image_interval(g, u, v)?;
                let feasible = !constant.is_negative() && constant <= Q::one();
                CexEquation {
                    atom,
                    lower_slope: None,
                    upper_slope: Some(sg),
                    remainder,
                    constant,
                    coefficient: Q::zero(),
                    image_interval: y_interval.clone(),
                    y_interval,
                    feasible,
                }
            }
            (None, None) => CexEquation {
                atom: atom.clone(),
                lower_slope: None,
                upper_slope: None,
                feasible: remainder.is_zero(),
                constant: remainder.clone(),
                remainder,
                coefficient: Q::zero(),
                y_interval: atom.clone(),
                image_interval: atom,
            },
        };
        out.push(eq);
    }
    Ok(out)
}

fn is_trivial(eq: &CexEquation) -> bool {
    eq.constant.is_zero()
        && (eq.coefficient.is_one() && eq.y_interval == eq.image_interval || eq.lower_slope.is_none() && eq.upper_slope.is_none())
}

/// Decides whether some `p₁` makes Lebesgue measure invariant for `(τ₁, τ₂; p₁, 1 − p₁)`.
pub fn verify_cex_infeasibility_for(tau1: &PiecewiseMonotoneMap, tau2: &PiecewiseMonotoneMap) -> Result<FeasibilityReport> {
    let equations = derive_cex_equations(tau1, tau2)?;
    let bad = equations.iter().find(|e| !e.feasible).cloned();
    let mut report = match bad {
        Some(eq) => {
            let reason = if eq.coefficient.is_one() && eq.y_interval == eq.image_interval {
                format!("p1(y) = {} + p1(y) has no solution", rational::format_q(&eq.constant))
            } else if eq.constant > Q::one() {
                format!("constant {} exceeds 1 while p1 takes values in [0, 1]", rational::format_q(&eq.constant))
            } else {
                format!(
                    "constant {} plus coefficient {} is negative while p1 takes values in [0, 1]",
                    rational::format_q(&eq.constant),
                    rational::format_q(&eq.coefficient)
                )
            };
            FeasibilityReport::new(
                Verdict::Infeasible,
                Some(Witness::FunctionalEquation { equation: Box::new(eq), reason }),
                "no weighting exists",
            )
        }
        None if equations.iter().all(is_trivial) => {
            FeasibilityReport::new(Verdict::Feasible, None, "every equation is satisfied by any weighting")
        }
        None => FeasibilityReport::new(Verdict::Inconclusive, None, "every equation is solvable on its own"),
    };
    report.equations = equations;
    Ok(report)
}

/// The check for the built-in semi-Markov pair.
pub fn verify_cex_infeasibility() -> Result<FeasibilityReport> {
    let mut report = verify_cex_infeasibility_for(&registry::sec6_tau1(), &registry::sec6_tau2())?;
    let decisive = report.equations.iter().any(|e| e.constant > Q::one() && e.coefficient.is_one());
    if report.verdict == Verdict::Infeasible && !decisive {
        report.verdict = Verdict::Inconclusive;
        report.feasible = false;
        report.note = "no equation of the form p1(y) = c + p1(u(y)) with c > 1 was found; review the derivation".into();
    }
    Ok(report)
}

/// A random weighting and the exact sup distance of `P_T 1` from `1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub weights: ProbabilityWeighting,
    #[serde(with = "rational::serde_q")]
    pub deviation: Q,
}

/// Tries `candidates` random step functions `p₁` (cuts on a 1/400 grid, values in
/// steps of 1/100) and records the exact sup deviation of `P_T 1` from `1`.
pub fn brute_force_cex_search(candidates: usize, seed: u64) -> Result<(Vec<CandidateOutcome>, FeasibilityReport)> {
    let maps = vec![registry::sec6_tau1(), registry::sec6_tau2()];
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let uniform = PiecewiseConstantDensity::uniform();
    let mut outcomes = Vec::with_capacity(candidates);
    for _ in 0..candidates {
        let cuts = rng.gen_range(1..=6);
        let mut knots: Vec<Q> = (0..cuts).map(|_| q(rng.gen_range(1..80), 400)).collect();
        knots.push(qi(0));
        knots.push(q(1, 5));
        knots.push(qi(1));
        knots.sort();
        knots.dedup();
        let p: Vec<Q> = (0..knots.len() - 1).map(|_| q(rng.gen_range(0..=100), 100)).collect();
        let complement = p.iter().map(|v| Q::one() - v).collect();
        let weights = ProbabilityWeighting::new(knots, vec![p, complement])?;
        let rm = RandomMap::new(maps.clone(), weights.clone())?;
        let out = fp_apply_random(&rm, &uniform)?;
        let deviation = out.sup_distance(&uniform).0;
        outcomes.push(CandidateOutcome { weights, deviation });
    }
    let min = outcomes.iter().map(|o| to_f64(&o.deviation)).fold(f64::INFINITY, f64::min);
    let max = outcomes.iter().map(|o| to_f64(&o.deviation)).fold(0.0, f64::max);
    let verdict = if min > 0.1 { Verdict::Infeasible } else { Verdict::Inconclusive };
    let report = FeasibilityReport::new(
        verdict,
        Some(Witness::Search { candidates, seed, min_deviation: min, max_deviation: max }),
        "sup deviation of the transferred uniform density over random step weightings",
    );
    Ok((outcomes, report))
}
