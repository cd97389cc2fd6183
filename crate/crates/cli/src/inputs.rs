//! Objects named on the command line: registered ids or JSON files.

use std::path::Path;

use acimsel::examples::{self, registry, ExampleObject};
use acimsel::interval_maps::description::MapDescription;
use acimsel::interval_maps::{envelope_allowing_crossings, PiecewiseMonotoneMap, DEFAULT_GRID};
use acimsel::measures::{invariant_density, DistributionFunction, PiecewiseConstantDensity};
use acimsel::rational::{format_q, parse_scalar, Q};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::run::{CliError, CliResult};

fn read_json<T: for<'de> Deserialize<'de>>(path: &str) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))
}

fn is_file(spec: &str) -> bool {
    Path::new(spec).is_file()
}

fn registered(spec: &str) -> CliResult<Option<ExampleObject>> {
    match registry::get(spec) {
        Ok(o) => Ok(Some(o)),
        Err(acimsel::Error::UnknownId(_)) if is_file(spec) => Ok(None),
        Err(acimsel::Error::UnknownId(_)) => Err(CliError::Config(format!("`{spec}` is neither a registered id nor a file"))),
        Err(e) => Err(e.into()),
    }
}

pub fn map(spec: &str) -> CliResult<PiecewiseMonotoneMap> {
    match registered(spec)? {
        Some(o) => Ok(o.into_map()?),
        None => Ok(read_json::<MapDescription>(spec)?.build()?),
    }
}

pub fn cdf(spec: &str) -> CliResult<DistributionFunction> {
    if spec == "uniform" {
        return Ok(DistributionFunction::identity());
    }
    match registered(spec)? {
        Some(o) => Ok(o.into_cdf()?),
        None => {
            let f: DistributionFunction = read_json(spec)?;
            f.validate()?;
            Ok(f)
        }
    }
}

pub fn density(spec: &str) -> CliResult<PiecewiseConstantDensity> {
    if spec == "uniform" {
        return Ok(PiecewiseConstantDensity::uniform());
    }
    match registered(spec)? {
        Some(o) => Ok(o.into_density()?),
        None => {
            let d: PiecewiseConstantDensity = read_json(spec)?;
            Ok(PiecewiseConstantDensity::new(d.breakpoints().to_vec(), d.values().to_vec())?)
        }
    }
}

/// A rational flag value and whether it was given as a decimal.
pub fn scalar(text: &str) -> CliResult<(Q, Value)> {
    let p = parse_scalar(text)?;
    let record = json!({"text": text, "value": format_q(&p.value), "exact": !p.from_decimal});
    Ok((p.value, record))
}

#[derive(Deserialize)]
struct EnvelopeFile {
    tau1: MapDescription,
    tau2: MapDescription,
    #[serde(default)]
    f1: Option<DistributionFunction>,
    #[serde(default)]
    f2: Option<DistributionFunction>,
}

pub fn envelope(spec: &str) -> CliResult<examples::EnvelopeExample> {
    if examples::ENVELOPE_IDS.contains(&spec) {
        return Ok(examples::envelope(spec)?);
    }
    if !is_file(spec) {
        return Err(CliError::Config(format!(
            "`{spec}` is neither a built-in envelope ({}) nor a file",
            examples::ENVELOPE_IDS.join(", ")
        )));
    }
    let file: EnvelopeFile = read_json(spec)?;
    let (t1, t2) = (file.tau1.build()?, file.tau2.build()?);
    let markov = |m: &PiecewiseMonotoneMap| invariant_density(m).map(|d| DistributionFunction::from_density(&d));
    let f1 = match file.f1 {
        Some(f) => f,
        None => markov(&t1)?,
    };
    let f2 = match file.f2 {
        Some(f) => f,
        None => markov(&t2)?,
    };
    Ok(examples::EnvelopeExample { id: spec.into(), envelope: envelope_allowing_crossings(&t1, &t2, DEFAULT_GRID)?, f1, f2 })
}
