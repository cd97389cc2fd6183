//! Tree description of maps for JSON configs and exports.
//!
//! ```json
//! {"breakpoints": ["0", "1/2", "1"],
//!  "branches": [{"kind": "affine", "slope": "2", "intercept": "0", "monotone": "inc"},
//!               {"kind": "affine", "slope": "-2", "intercept": "2", "monotone": "dec"}]}
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::DistributionFunction;
use crate::rational::{self, Q};

use super::branch::{Branch, BranchForm, Interval, MonotoneClosure, Monotonicity};
use super::map::PiecewiseMonotoneMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormDescription {
    Affine {
        #[serde(with = "rational::serde_q")]
        slope: Q,
        #[serde(with = "rational::serde_q")]
        intercept: Q,
    },
    Quadratic {
        #[serde(with = "rational::serde_q")]
        a: Q,
        #[serde(with = "rational::serde_q")]
        b: Q,
        #[serde(with = "rational::serde_q")]
        c: Q,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<f64>,
    },
    Composite {
        outer: Box<FormDescription>,
        inner: Box<FormDescription>,
    },
    Cdf {
        cdf: DistributionFunction,
        #[serde(default)]
        inverted: bool,
    },
    /// Monotone table, linearly interpolated.
    Tabulated {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDescription {
    #[serde(flatten)]
    pub form: FormDescription,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<Monotonicity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDescription {
    #[serde(with = "rational::serde_q::vec")]
    pub breakpoints: Vec<Q>,
    pub branches: Vec<BranchDescription>,
}

impl FormDescription {
    fn build(&self, lo: f64, hi: f64) -> Result<BranchForm> {
        Ok(match self {
            FormDescription::Affine { slope, intercept } => BranchForm::affine(slope.clone(), intercept.clone()),
            FormDescription::Quadratic { a, b, c, lo: l, hi: h } => {
                BranchForm::quadratic(a.clone(), b.clone(), c.clone(), l.unwrap_or(lo), h.unwrap_or(hi))
            }
            FormDescription::Composite { outer, inner } => {
                let inner_form = inner.build(lo, hi)?;
                let (u, v) = (inner_form.eval(lo), inner_form.eval(hi));
                let outer_form = outer.build(u.min(v), u.max(v))?;
                BranchForm::compose(outer_form, inner_form)
            }
            FormDescription::Cdf { cdf, inverted } => {
                cdf.validate()?;
                BranchForm::Cdf { cdf: Arc::new(cdf.clone()), inverted: *inverted }
            }
            FormDescription::Tabulated { xs, ys } => BranchForm::Closure(MonotoneClosure::tabulated("table", xs.clone(), ys.clone())?),
        })
    }

    fn describe(form: &BranchForm, lo: f64, hi: f64, samples: usize) -> FormDescription {
        match form {
            BranchForm::Affine { slope, intercept } => FormDescription::Affine { slope: slope.clone(), intercept: intercept.clone() },
            BranchForm::Quadratic { a, b, c, lo, hi } => {
                FormDescription::Quadratic { a: a.clone(), b: b.clone(), c: c.clone(), lo: Some(*lo), hi: Some(*hi) }
            }
            BranchForm::Cdf { cdf, inverted } => FormDescription::Cdf { cdf: (**cdf).clone(), inverted: *inverted },
            BranchForm::Composite { outer, inner } => {
                let (u, v) = (inner.eval(lo), inner.eval(hi));
                FormDescription::Composite {
                    outer: Box::new(Self::describe(outer, u.min(v), u.max(v), samples)),
                    inner: Box::new(Self::describe(inner, lo, hi, samples)),
                }
            }
            BranchForm::Closure(_) => {
                let xs: Vec<f64> = (0..=samples).map(|k| lo + (hi - lo) * k as f64 / samples as f64).collect();
                let ys = xs.iter().map(|x| form.eval(*x)).collect();
                FormDescription::Tabulated { xs, ys }
            }
        }
    }
}

impl MapDescription {
    pub fn build(&self) -> Result<PiecewiseMonotoneMap> {
        if self.breakpoints.len() != self.branches.len() + 1 {
            return Err(Error::Parse(format!("{} breakpoints cannot carry {} branches", self.breakpoints.len(), self.branches.len())));
        }
        let mut branches = Vec::with_capacity(self.branches.len());
        for (j, b) in self.branches.iter().enumerate() {
            let dom = Interval::new(self.breakpoints[j].clone(), self.breakpoints[j + 1].clone())?;
            let form = b.form.build(dom.lo_f64(), dom.hi_f64())?;
            let branch = match b.monotone {
                Some(m) => Branch::with_monotonicity(dom, form, m)?,
                None => Branch::new(dom, form)?,
            };
            branches.push(branch);
        }
        PiecewiseMonotoneMap::new(branches)
    }

    /// Describes `map`; closure branches are exported as tables with `samples` cells.
    pub fn of(map: &PiecewiseMonotoneMap, samples: usize) -> Self {
        MapDescription {
            breakpoints: map.breakpoints().to_vec(),
            branches: map
                .branches()
                .iter()
                .map(|b| {
                    let (lo, hi) = b.domain_f64();
                    BranchDescription { form: FormDescription::describe(b.form(), lo, hi, samples), monotone: Some(b.monotonicity()) }
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::sup_difference;

    #[test]
    fn parses_tent_description() {
        let text = r#"{"breakpoints": ["0", "1/2", 1],
            "branches": [{"kind": "affine", "slope": "2", "intercept": 0, "monotone": "inc"},
                         {"kind": "affine", "slope": "-2", "intercept": "2", "monotone": "dec"}]}"#;
        let d: MapDescription = serde_json::from_str(text).unwrap();
        let m = d.build().unwrap();
        assert_eq!(sup_difference(&m, &PiecewiseMonotoneMap::tent(), 100).unwrap().0, 0.0);
        let again: MapDescription = serde_json::from_str(&serde_json::to_string(&MapDescription::of(&m, 8)).unwrap()).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn wrong_monotonicity_is_rejected() {
        let text = r#"{"breakpoints": ["0", "1"],
            "branches": [{"kind": "affine", "slope": "1", "intercept": "0", "monotone": "dec"}]}"#;
        let d: MapDescription = serde_json::from_str(text).unwrap();
        assert!(d.build().is_err());
    }

    #[test]
    fn quadratic_and_table_round_trip() {
        let text = r#"{"breakpoints": ["0", "1/4", "1/2"],
            "branches": [{"kind": "quadratic", "a": "4", "b": "0", "c": "0"},
                         {"kind": "tabulated", "xs": [0.25, 0.5], "ys": [0.25, 0.75]}]}"#;
        let m = serde_json::from_str::<MapDescription>(text).unwrap().build().unwrap();
        assert_eq!(m.evaluate(0.125).unwrap(), 0.0625);
        assert_eq!(m.evaluate(0.375).unwrap(), 0.5);
        let back = MapDescription::of(&m, 4).build().unwrap();
        assert!(sup_difference(&m, &back, 64).unwrap().0 < 1e-15);
    }
}
