//! Python bindings for the `acimsel` library. Structured results are returned
//! as plain dicts and lists; rationals appear as `"p/q"` strings.

use acimsel::examples::{self, registry};
use acimsel::interval_maps::description::MapDescription;
use acimsel::measures::invariant_density as density_of;
use acimsel::rational::{format_q, parse_q, Q};
use acimsel::selection::{
    betweenness_check, construct_conjugacy_selection, construct_selection, construct_tentlike_with, symmetric_slope_solver,
    DEFAULT_RESOLUTION,
};
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::{json, Value};

fn err(e: acimsel::Error) -> PyErr {
    use acimsel::Error::*;
    match e {
        UnknownId(_) | Unavailable { .. } => PyKeyError::new_err(e.to_string()),
        Parameter(_) | Parse(_) | Domain { .. } | Range { .. } | InvalidMap(_) | Envelope { .. } | Unsupported(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py(py: Python<'_>, value: Value) -> PyResult<Bound<'_, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

fn rational(text: &str) -> PyResult<Q> {
    parse_q(text).map_err(err)
}

fn strings(v: &[Q]) -> Vec<String> {
    v.iter().map(format_q).collect()
}

/// Ids of the registered maps, densities and distribution functions.
#[pyfunction]
fn ids() -> Vec<&'static str> {
    registry::IDS.to_vec()
}

/// Value of a registered map at `x`.
#[pyfunction]
fn evaluate(map_id: &str, x: f64) -> PyResult<f64> {
    registry::get_map(map_id).and_then(|m| m.evaluate(x)).map_err(err)
}

/// Exact invariant density of a Markov map as `(breakpoints, values)`.
#[pyfunction]
fn invariant_density(map_id: &str) -> PyResult<(Vec<String>, Vec<String>)> {
    let d = registry::get_map(map_id).and_then(|m| density_of(&m)).map_err(err)?;
    Ok((strings(d.breakpoints()), strings(d.values())))
}

/// Pushforward check of a registered distribution function under a registered map.
#[pyfunction]
#[pyo3(signature = (map_id, cdf_id, grid = 1 << 12))]
fn check_invariance<'py>(py: Python<'py>, map_id: &str, cdf_id: &str, grid: usize) -> PyResult<Bound<'py, PyAny>> {
    let m = registry::get_map(map_id).map_err(err)?;
    let f = registry::get_cdf(cdf_id).map_err(err)?;
    let r = acimsel::transfer::check_invariance(&m, &f, grid).map_err(err)?;
    to_py(py, json!(r))
}

/// Selection of a built-in envelope preserving `lam F1 + (1 − lam) F2`.
///
/// `method` is one of `main`, `tentlike`, `conjugacy` (on `tent-phi2`) or
/// `slopes` (the symmetric solver, ignoring the envelope's edges).
#[pyfunction]
#[pyo3(signature = (envelope, lam, method = "main", resolution = DEFAULT_RESOLUTION, grid = 1 << 12, samples = 0))]
fn select<'py>(
    py: Python<'py>,
    envelope: &str,
    lam: &str,
    method: &str,
    resolution: usize,
    grid: usize,
    samples: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let lambda = rational(lam)?;
    let ex = examples::envelope(envelope).map_err(err)?;
    let r = match method {
        "main" => construct_selection(&ex.envelope, &ex.f1, &ex.f2, &lambda, resolution),
        "tentlike" => construct_tentlike_with(&ex.envelope, &ex.f1, &ex.f2, &lambda, resolution).map(|p| p.0),
        "conjugacy" => registry::get_cdf("sec4/phi2").and_then(|h| construct_conjugacy_selection(ex.envelope.tau1(), &h, &lambda)),
        "slopes" => symmetric_slope_solver(&lambda).map(|s| s.selection),
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    }
    .map_err(err)?;
    let inv = r.invariance(grid).map_err(err)?;
    let b = betweenness_check(&r.eta, &ex.envelope, grid).map_err(err)?;
    let graph: Vec<(f64, f64)> = if samples > 0 { r.eta.graph(samples) } else { Vec::new() };
    to_py(
        py,
        json!({
            "construction": r.construction,
            "lambda": format_q(&r.lambda),
            "exact": r.exact,
            "invariance": inv,
            "betweenness": b,
            "envelope_crossing": ex.envelope.crossing(),
            "eta": MapDescription::of(&r.eta, 256),
            "graph": graph,
        }),
    )
}

/// Slope magnitudes of the symmetric solution on `[0, 1/2]`.
#[pyfunction]
fn symmetric_slopes(lam: &str) -> PyResult<Vec<String>> {
    let s = symmetric_slope_solver(&rational(lam)?).map_err(err)?;
    Ok(strings(&s.magnitudes))
}

/// Figure dataset as `{"header", "x", "series", "description"}`.
#[pyfunction]
#[pyo3(signature = (name, resolution = 1000))]
fn reproduce_figure<'py>(py: Python<'py>, name: &str, resolution: usize) -> PyResult<Bound<'py, PyAny>> {
    let f = examples::reproduce_figure(name, resolution).map_err(err)?;
    let series: serde_json::Map<String, Value> = f.series.iter().map(|s| (s.name.clone(), json!(s.values))).collect();
    to_py(py, json!({"header": f.header(), "x": f.x, "series": series, "description": f.description}))
}

/// Exact infeasibility report for the five-branch counterexample.
#[pyfunction]
fn cex_report(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, json!(acimsel::randmaps::verify_cex_infeasibility().map_err(err)?))
}

/// Constant-weight and BGR-weight audits of Lebesgue invariance.
#[pyfunction]
fn claim_audit(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    let c = acimsel::randmaps::evaluate_constant_weight_claim().map_err(err)?;
    let b = acimsel::randmaps::evaluate_bgr_weights().map_err(err)?;
    to_py(py, json!({"constant_weights": c, "bgr_weights": b}))
}

#[pymodule]
fn acimsel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", acimsel::VERSION)?;
    m.add_function(wrap_pyfunction!(ids, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_density, m)?)?;
    m.add_function(wrap_pyfunction!(check_invariance, m)?)?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_slopes, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_figure, m)?)?;
    m.add_function(wrap_pyfunction!(cex_report, m)?)?;
    m.add_function(wrap_pyfunction!(claim_audit, m)?)?;
    Ok(())
}
