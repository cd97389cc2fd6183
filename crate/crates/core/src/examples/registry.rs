use crate::error::{Error, Result};
use crate::interval_maps::{envelope_allowing_crossings, Branch, BranchForm, Envelope, Interval, PiecewiseMonotoneMap, DEFAULT_GRID};
use crate::measures::{invariant_density, Curve, CurveSegment, DistributionFunction, PiecewiseConstantDensity};
use crate::randmaps;
use crate::rational::{q, qi, Q};

/// Something the registry can hand out.
#[derive(Debug, Clone)]
pub enum ExampleObject {
    Map(PiecewiseMonotoneMap),
    Cdf(DistributionFunction),
    Density(PiecewiseConstantDensity),
}

impl ExampleObject {
    pub fn kind(&self) -> &'static str {
        match self {
            ExampleObject::Map(_) => "map",
            ExampleObject::Cdf(_) => "cdf",
            ExampleObject::Density(_) => "density",
        }
    }

    pub fn into_map(self) -> Result<PiecewiseMonotoneMap> {
        match self {
            ExampleObject::Map(m) => Ok(m),
            other => Err(Error::Parameter(format!("expected a map, found a {}", other.kind()))),
        }
    }

    pub fn into_cdf(self) -> Result<DistributionFunction> {
        match self {
            ExampleObject::Cdf(f) => Ok(f),
            ExampleObject::Density(d) => Ok(DistributionFunction::from_density(&d)),
            other => Err(Error::Parameter(format!("expected a distribution function, found a {}", other.kind()))),
        }
    }

    pub fn into_density(self) -> Result<PiecewiseConstantDensity> {
        match self {
            ExampleObject::Density(d) => Ok(d),
            other => Err(Error::Parameter(format!("expected a density, found a {}", other.kind()))),
        }
    }
}

/// Ids of every registered object.
pub const IDS: &[&str] = &[
    "ex2.1/tau1",
    "ex2.1/tau2",
    "ex2.1/remark",
    "ex2.1/f1",
    "ex2.1/f2",
    "sec4/phi1",
    "sec4/phi2",
    "sec4/tau1",
    "sec4/tau2",
    "sec5/tau1",
    "sec5/tau2",
    "sec5/f1",
    "sec6/tau1",
    "sec6/tau2",
    "sec6/tau",
    "sec6/tau21",
];

/// Registered ids that have no usable definition.
pub const UNAVAILABLE: &[(&str, &str)] =
    &[("sec5/markov_example", "the pictured Markov maps come without formulas, so they are not reconstructed")];

/// Ids of the built-in envelopes.
pub const ENVELOPE_IDS: &[&str] = &["ex2.1", "sec4", "sec5", "sec6", "tent-phi2"];

/// Fresh instance of a registered object.
pub fn get(id: &str) -> Result<ExampleObject> {
    use ExampleObject::*;
    Ok(match id {
        "ex2.1/tau1" => Map(ex21_tau1()),
        "ex2.1/tau2" => Map(ex21_tau2()),
        "ex2.1/remark" => Map(ex21_remark()),
        "ex2.1/f1" => Density(step(&[q(3, 2), q(1, 2)])),
        "ex2.1/f2" => Density(step(&[q(2, 3), q(4, 3)])),
        "sec4/phi1" => Cdf(phi1()),
        "sec4/phi2" => Cdf(phi2()),
        "sec4/tau1" => Map(PiecewiseMonotoneMap::tent().conjugate(&phi1())?),
        "sec4/tau2" => Map(PiecewiseMonotoneMap::tent().conjugate(&phi2())?),
        "sec5/tau1" => Map(sec5_tau1()),
        "sec5/tau2" => Map(PiecewiseMonotoneMap::tent()),
        "sec5/f1" => Density(PiecewiseConstantDensity::new(vec![qi(0), q(1, 4), q(3, 4), qi(1)], vec![qi(0), qi(2), qi(0)])?),
        "sec6/tau1" => Map(sec6_tau1()),
        "sec6/tau2" => Map(sec6_tau2()),
        "sec6/tau" => Map(five_x_mod_one()),
        "sec6/tau21" => Map(randmaps::tau21()?),
        _ => {
            if let Some((_, note)) = UNAVAILABLE.iter().find(|(k, _)| *k == id) {
                return Err(Error::Unavailable { id: id.to_string(), note: note.to_string() });
            }
            return Err(Error::UnknownId(id.to_string()));
        }
    })
}

pub fn get_map(id: &str) -> Result<PiecewiseMonotoneMap> {
    get(id)?.into_map()
}

pub fn get_cdf(id: &str) -> Result<DistributionFunction> {
    get(id)?.into_cdf()
}

/// An envelope together with distribution functions invariant for its edges.
#[derive(Debug, Clone)]
pub struct EnvelopeExample {
    pub id: String,
    pub envelope: Envelope,
    pub f1: DistributionFunction,
    pub f2: DistributionFunction,
}

fn markov_cdf(map: &PiecewiseMonotoneMap) -> Result<DistributionFunction> {
    Ok(DistributionFunction::from_density(&invariant_density(map)?))
}

/// A built-in envelope. The `sec4` and `tent-phi2` pairs cross near `x = 1`;
/// the crossing is kept in [`Envelope::crossing`] rather than rejected.
pub fn envelope(id: &str) -> Result<EnvelopeExample> {
    let (t1, t2, f1, f2) = match id {
        "ex2.1" => {
            let (t1, t2) = (ex21_tau1(), ex21_tau2());
            let (f1, f2) = (markov_cdf(&t1)?, markov_cdf(&t2)?);
            (t1, t2, f1, f2)
        }
        "sec4" => (get_map("sec4/tau1")?, get_map("sec4/tau2")?, phi1(), phi2()),
        "sec5" => (sec5_tau1(), PiecewiseMonotoneMap::tent(), get_cdf("sec5/f1")?, DistributionFunction::identity()),
        "sec6" => {
            let (t1, t2) = (sec6_tau1(), sec6_tau2());
            let (f1, f2) = (markov_cdf(&t1)?, markov_cdf(&t2)?);
            (t1, t2, f1, f2)
        }
        "tent-phi2" => (PiecewiseMonotoneMap::tent(), get_map("sec4/tau2")?, DistributionFunction::identity(), phi2()),
        _ => return Err(Error::UnknownId(id.to_string())),
    };
    Ok(EnvelopeExample { id: id.to_string(), envelope: envelope_allowing_crossings(&t1, &t2, DEFAULT_GRID)?, f1, f2 })
}

fn step(values: &[Q]) -> PiecewiseConstantDensity {
    PiecewiseConstantDensity::new(vec![qi(0), q(1, 2), qi(1)], values.to_vec()).unwrap()
}

pub(crate) fn ex21_tau1() -> PiecewiseMonotoneMap {
    PiecewiseMonotoneMap::affine(&[
        (qi(0), q(3, 8), q(4, 3), qi(0)),
        (q(3, 8), q(1, 2), qi(4), qi(-1)),
        (q(1, 2), q(5, 8), qi(-4), qi(3)),
        (q(5, 8), qi(1), q(-4, 3), q(4, 3)),
    ])
    .unwrap()
}

pub(crate) fn ex21_tau2() -> PiecewiseMonotoneMap {
    PiecewiseMonotoneMap::affine(&[
        (qi(0), q(1, 6), qi(3), qi(0)),
        (q(1, 6), q(1, 2), q(3, 2), q(1, 4)),
        (q(1, 2), q(5, 6), q(-3, 2), q(7, 4)),
        (q(5, 6), qi(1), qi(-3), qi(3)),
    ])
    .unwrap()
}

fn ex21_remark() -> PiecewiseMonotoneMap {
    PiecewiseMonotoneMap::affine(&[
        (qi(0), q(1, 6), qi(3), qi(0)),
        (q(1, 6), q(1, 2), q(3, 2), q(1, 4)),
        (q(1, 2), q(2, 3), qi(-3), q(5, 2)),
        (q(2, 3), qi(1), q(-3, 2), q(3, 2)),
    ])
    .unwrap()
}

pub(crate) fn phi1() -> DistributionFunction {
    DistributionFunction::curved(vec![
        CurveSegment { lo: 0.0, hi: 0.5, curve: Curve::Quadratic { a: 2.0, b: 0.0, c: 0.0 } },
        CurveSegment { lo: 0.5, hi: 1.0, curve: Curve::Quadratic { a: -2.0, b: 4.0, c: -1.0 } },
    ])
    .unwrap()
}

/// On `[0, 1/2]`, `−1/4 + √(1 + 16x)/4` is the inverse of `y ↦ y² + y/2`.
pub(crate) fn phi2() -> DistributionFunction {
    DistributionFunction::curved(vec![
        CurveSegment { lo: 0.0, hi: 0.5, curve: Curve::InverseQuadratic { a: 1.0, b: 0.5, c: 0.0, y_lo: 0.0, y_hi: 0.5 } },
        CurveSegment { lo: 0.5, hi: 1.0, curve: Curve::Quadratic { a: 0.5, b: 0.25, c: 0.25 } },
    ])
    .unwrap()
}

pub(crate) fn sec5_tau1() -> PiecewiseMonotoneMap {
    let quad = |lo: Q, hi: Q, a: i64, b: i64, c: i64| {
        let (l, h) = (crate::rational::to_f64(&lo), crate::rational::to_f64(&hi));
        Branch::new(Interval::new(lo, hi).unwrap(), BranchForm::quadratic(qi(a), qi(b), qi(c), l, h)).unwrap()
    };
    PiecewiseMonotoneMap::new(vec![
        quad(qi(0), q(1, 4), 4, 0, 0),
        Branch::affine(q(1, 4), q(1, 2), qi(2), q(-1, 4)).unwrap(),
        Branch::affine(q(1, 2), q(3, 4), qi(-2), q(7, 4)).unwrap(),
        quad(q(3, 4), qi(1), 4, -8, 4),
    ])
    .unwrap()
}

fn shared_branches() -> Vec<(Q, Q, Q, Q)> {
    (1..5).map(|k| (q(k, 5), q(k + 1, 5), qi(5), qi(-k))).collect()
}

pub(crate) fn sec6_tau1() -> PiecewiseMonotoneMap {
    let mut pieces = vec![(qi(0), q(3, 20), q(4, 3), qi(0)), (q(3, 20), q(1, 5), qi(16), q(-11, 5))];
    pieces.extend(shared_branches());
    PiecewiseMonotoneMap::affine(&pieces).unwrap()
}

pub(crate) fn sec6_tau2() -> PiecewiseMonotoneMap {
    let mut pieces = vec![(qi(0), q(1, 20), qi(16), qi(0)), (q(1, 20), q(1, 5), q(4, 3), q(11, 15))];
    pieces.extend(shared_branches());
    PiecewiseMonotoneMap::affine(&pieces).unwrap()
}

fn five_x_mod_one() -> PiecewiseMonotoneMap {
    let pieces: Vec<_> = (0..5).map(|k| (q(k, 5), q(k + 1, 5), qi(5), qi(-k))).collect();
    PiecewiseMonotoneMap::affine(&pieces).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{markov_invariant_density, MarkovStructure};
    use crate::rational::to_f64;
    use approx::assert_abs_diff_eq;

    #[test]
    fn every_id_builds() {
        for id in IDS {
            get(id).unwrap_or_else(|e| panic!("{id}: {e}"));
        }
        for id in ENVELOPE_IDS {
            let env = envelope(id).unwrap_or_else(|e| panic!("{id}: {e}"));
            let crosses = matches!(*id, "sec4" | "tent-phi2");
            assert_eq!(env.envelope.crossing().is_some(), crosses, "{id}");
        }
        assert!(matches!(get("sec5/markov_example"), Err(Error::Unavailable { .. })));
        assert!(matches!(get("nope"), Err(Error::UnknownId(_))));
    }

    #[test]
    fn conjugated_pair_crosses_near_one() {
        let c = envelope("sec4").unwrap().envelope.crossing().cloned().unwrap();
        assert!(c.at > 0.97 && c.excess > 1e-3 && c.excess < 1.2e-3);
        let c = envelope("tent-phi2").unwrap().envelope.crossing().cloned().unwrap();
        assert!(c.at > 0.85 && c.excess > 0.02);
    }

    #[test]
    fn sample_values() {
        assert_eq!(ex21_tau1().evaluate_exact(&q(3, 8)).unwrap(), q(1, 2));
        assert_eq!(sec6_tau1().evaluate_exact(&q(3, 20)).unwrap(), q(1, 5));
        assert_eq!(phi1().eval(0.5), 0.5);
        assert_eq!(ex21_tau1().evaluate(1.0).unwrap(), 0.0);
        let r = ex21_remark();
        assert_eq!(r.branches().len(), 4);
        assert_eq!(r.branches()[2].slope().unwrap(), &qi(-3));
        assert_eq!(r.branches()[2].domain().hi, q(4, 6));
        let t = five_x_mod_one();
        assert!(t.branches().iter().all(|b| b.slope() == Some(&qi(5))));
    }

    #[test]
    fn displayed_continuity() {
        for id in ["ex2.1/tau1", "ex2.1/tau2", "ex2.1/remark", "sec5/tau1", "sec5/tau2"] {
            assert!(get_map(id).unwrap().is_continuous(0.0), "{id}");
        }
        for id in ["sec4/tau1", "sec4/tau2"] {
            assert!(get_map(id).unwrap().is_continuous(1e-14), "{id}");
        }
        let t1 = sec6_tau1();
        assert!(t1.restrict(&qi(0), &q(1, 5)).unwrap().is_continuous(0.0));
    }

    #[test]
    fn phi2_closed_form_round_trip() {
        let f = phi2();
        for k in 0..=200 {
            let x = k as f64 / 200.0;
            let direct = if x < 0.5 { -0.25 + 0.25 * (1.0 + 16.0 * x).sqrt() } else { 0.5 * (x * x + 0.5 * (x + 1.0)) };
            assert_abs_diff_eq!(f.eval(x), direct, epsilon = 1e-14);
            assert_abs_diff_eq!(f.invert(f.eval(x)).unwrap(), x, epsilon = 1e-12);
        }
    }

    #[test]
    fn conjugated_tents_match_formula() {
        let (t1, t2) = (get_map("sec4/tau1").unwrap(), get_map("sec4/tau2").unwrap());
        let tent = PiecewiseMonotoneMap::tent();
        for k in 0..=1000 {
            let x = k as f64 / 1000.0;
            for (m, g) in [(&t1, phi1()), (&t2, phi2())] {
                let want = g.invert(tent.evaluate(g.eval(x)).unwrap()).unwrap();
                assert_abs_diff_eq!(m.evaluate(x).unwrap(), want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn markov_densities_of_lower_and_upper_maps() {
        let f1 = markov_invariant_density(&ex21_tau1(), &MarkovStructure::discover(&ex21_tau1()).unwrap()).unwrap();
        assert!(f1.same_density(&get("ex2.1/f1").unwrap().into_density().unwrap()));
        let f2 = invariant_density(&ex21_tau2()).unwrap();
        assert!(f2.same_density(&get("ex2.1/f2").unwrap().into_density().unwrap()));
        assert_eq!(to_f64(&f2.values()[0]), 2.0 / 3.0);
    }
}
