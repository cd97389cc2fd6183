//! Datasets behind the figures: sampled maps and distribution functions.

use std::io::Write;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::interval_maps::description::MapDescription;
use crate::interval_maps::PiecewiseMonotoneMap;
use crate::io::write_csv;
use crate::measures::DistributionFunction;
use crate::rational::{format_q, q, to_f64, Q};
use crate::selection::{construct_selection, symmetric_slope_solver, DEFAULT_RESOLUTION};

use super::registry::{envelope, get_cdf, get_map, UNAVAILABLE};

/// Figure names accepted by [`reproduce_figure`]; `fig4` is listed but has no data.
pub const FIGURES: &[&str] = &["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"];

/// Cells used when exporting closure branches as tables.
const DESCRIPTION_SAMPLES: usize = 256;

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

/// Columns `x, series…` plus a JSON description of what was sampled.
#[derive(Debug, Clone)]
pub struct FigureData {
    pub name: String,
    pub x: Vec<f64>,
    pub series: Vec<Series>,
    pub description: Value,
}

impl FigureData {
    pub fn header(&self) -> Vec<String> {
        std::iter::once("x".to_string()).chain(self.series.iter().map(|s| s.name.clone())).collect()
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|s| s.name == name).map(|s| s.values.as_slice())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows = (0..self.x.len()).map(|i| std::iter::once(self.x[i]).chain(self.series.iter().map(|s| s.values[i])).collect());
        write_csv(out, &self.header(), rows)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }
}

fn grid(lo: &Q, hi: &Q, resolution: usize) -> Vec<f64> {
    let (a, b) = (to_f64(lo), to_f64(hi));
    (0..=resolution).map(|k| if k == resolution { b } else { a + (b - a) * k as f64 / resolution as f64 }).collect()
}

struct Builder {
    name: String,
    lo: Q,
    hi: Q,
    x: Vec<f64>,
    series: Vec<Series>,
    sources: Vec<Value>,
    parameters: Value,
}

impl Builder {
    fn new(name: &str, lo: Q, hi: Q, resolution: usize) -> Self {
        let x = grid(&lo, &hi, resolution);
        Builder { name: name.into(), lo, hi, x, series: Vec::new(), sources: Vec::new(), parameters: json!({}) }
    }

    fn map(mut self, column: &str, source: &str, m: &PiecewiseMonotoneMap) -> Result<Self> {
        let values = self.x.iter().map(|&x| m.evaluate(x)).collect::<Result<Vec<_>>>()?;
        self.series.push(Series { name: column.into(), values });
        self.sources.push(json!({"column": column, "source": source, "map": MapDescription::of(m, DESCRIPTION_SAMPLES)}));
        Ok(self)
    }

    fn cdf(mut self, column: &str, source: &str, f: &DistributionFunction) -> Self {
        let values = self.x.iter().map(|&x| f.eval(x)).collect();
        self.series.push(Series { name: column.into(), values });
        self.sources.push(json!({"column": column, "source": source, "cdf": f}));
        self
    }

    fn diagonal(mut self) -> Self {
        self.series.push(Series { name: "diagonal".into(), values: self.x.clone() });
        self.sources.push(json!({"column": "diagonal", "source": "identity"}));
        self
    }

    fn parameters(mut self, p: Value) -> Self {
        self.parameters = p;
        self
    }

    fn finish(self) -> FigureData {
        let description = json!({
            "figure": self.name,
            "domain": [format_q(&self.lo), format_q(&self.hi)],
            "points": self.x.len(),
            "series": self.sources,
            "parameters": self.parameters,
        });
        FigureData { name: self.name, x: self.x, series: self.series, description }
    }
}

fn unit(name: &str, resolution: usize) -> Builder {
    Builder::new(name, Q::from_integer(0.into()), Q::from_integer(1.into()), resolution)
}

fn slopes_figure(name: &str, lambda: Q, resolution: usize) -> Result<FigureData> {
    let s = symmetric_slope_solver(&lambda)?;
    Ok(unit(name, resolution)
        .map("tau", "symmetric_slope_solver", &s.selection.eta)?
        .cdf("F", "target", &s.selection.target_cdf)
        .parameters(json!({
            "lambda": format_q(&lambda),
            "slope_magnitudes": s.magnitudes.iter().map(format_q).collect::<Vec<_>>(),
            "profile": s.profile,
            "target_density": s.target,
        }))
        .finish())
}

/// Samples the objects shown in figure `name` at `resolution + 1` equally
/// spaced points.
pub fn reproduce_figure(name: &str, resolution: usize) -> Result<FigureData> {
    if resolution < 2 {
        return Err(Error::Parameter(format!("resolution {resolution} is below 2")));
    }
    let fifth = q(1, 5);
    Ok(match name {
        "fig1" => unit(name, resolution)
            .map("tau1", "ex2.1/tau1", &get_map("ex2.1/tau1")?)?
            .map("tau2", "ex2.1/tau2", &get_map("ex2.1/tau2")?)?
            .map("remark", "ex2.1/remark", &get_map("ex2.1/remark")?)?
            .finish(),
        "fig2" => {
            let alpha = q(3, 4);
            let (f1, f2) = (get_cdf("sec4/phi1")?, get_cdf("sec4/phi2")?);
            let f = DistributionFunction::convex_combination(&f1, &f2, &alpha)?;
            unit(name, resolution)
                .cdf("F1", "sec4/phi1", &f1)
                .cdf("F2", "sec4/phi2", &f2)
                .cdf("F", "convex_combination", &f)
                .parameters(json!({"alpha": format_q(&alpha)}))
                .finish()
        }
        "fig3" => {
            let alpha = q(3, 4);
            let ex = envelope("sec4")?;
            let r = construct_selection(&ex.envelope, &ex.f1, &ex.f2, &alpha, DEFAULT_RESOLUTION)?;
            unit(name, resolution)
                .map("tau1", "sec4/tau1", ex.envelope.tau1())?
                .map("tau2", "sec4/tau2", ex.envelope.tau2())?
                .map("eta", "construct_selection", &r.eta)?
                .diagonal()
                .parameters(json!({"alpha": format_q(&alpha), "method": "main", "resolution": DEFAULT_RESOLUTION}))
                .finish()
        }
        "fig4" => {
            let (id, note) = UNAVAILABLE[0];
            return Err(Error::Unavailable { id: format!("fig4 ({id})"), note: note.into() });
        }
        "fig5" => unit(name, resolution)
            .map("tau1", "sec5/tau1", &get_map("sec5/tau1")?)?
            .map("tau2", "sec5/tau2", &get_map("sec5/tau2")?)?
            .finish(),
        "fig6" => slopes_figure(name, q(1, 2), resolution)?,
        "fig7" => slopes_figure(name, q(1, 10), resolution)?,
        "fig8" => unit(name, resolution)
            .map("tau1", "sec6/tau1", &get_map("sec6/tau1")?)?
            .map("tau2", "sec6/tau2", &get_map("sec6/tau2")?)?
            .map("tau", "sec6/tau", &get_map("sec6/tau")?)?
            .finish(),
        "fig9" => Builder::new(name, Q::from_integer(0.into()), fifth.clone(), resolution)
            .map("tau1", "sec6/tau1", &get_map("sec6/tau1")?)?
            .map("tau2", "sec6/tau2", &get_map("sec6/tau2")?)?
            .finish(),
        "fig10" => {
            Builder::new(name, Q::from_integer(0.into()), fifth, resolution).map("tau21", "sec6/tau21", &get_map("sec6/tau21")?)?.finish()
        }
        _ => return Err(Error::UnknownId(name.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(fig: &FigureData, column: &str, x: f64) -> f64 {
        let i = fig.x.iter().position(|v| (v - x).abs() < 1e-15).unwrap();
        fig.series(column).unwrap()[i]
    }

    #[test]
    fn fig1_lower_map_vanishes_at_one() {
        let f = reproduce_figure("fig1", 64).unwrap();
        assert_eq!(f.header(), ["x", "tau1", "tau2", "remark"]);
        assert_eq!(at(&f, "tau1", 1.0), 0.0);
    }

    #[test]
    fn fig2_agrees_at_one_half() {
        let f = reproduce_figure("fig2", 64).unwrap();
        for c in ["F1", "F2", "F"] {
            assert!((at(&f, c, 0.5) - 0.5).abs() < 1e-15, "{c}");
        }
    }

    #[test]
    fn fig7_slopes() {
        let f = reproduce_figure("fig7", 880).unwrap();
        let tau = f.series("tau").unwrap();
        let slope = |a: f64| {
            let i = (a * 880.0).round() as usize;
            (tau[i + 1] - tau[i]) * 880.0
        };
        let want = [2.0, 18.0 / 11.0, 2.0, 22.0 / 9.0];
        for (x, w) in [0.05, 0.2, 0.3, 0.45].into_iter().zip(want) {
            assert!((slope(x) - w).abs() < 1e-9, "{x}: {}", slope(x));
        }
        assert_eq!(f.description["parameters"]["slope_magnitudes"], json!(["2", "18/11", "2", "22/9"]));
    }

    #[test]
    fn csv_layout() {
        let f = reproduce_figure("fig10", 20).unwrap();
        let text = f.to_csv_string().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,tau21");
        assert_eq!(lines.len(), 22);
        assert!(lines[21].starts_with("0.200000000000000,"));
    }

    #[test]
    fn unavailable_and_unknown() {
        assert!(matches!(reproduce_figure("fig4", 16), Err(Error::Unavailable { .. })));
        assert!(matches!(reproduce_figure("fig11", 16), Err(Error::UnknownId(_))));
    }
}
