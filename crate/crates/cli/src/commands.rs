use std::path::Path;

use acimsel::examples::{reproduce_figure, FIGURES};
use acimsel::interval_maps::description::MapDescription;
use acimsel::measures::{invariant_density, ks_distance, ulam_stationary, DistributionFunction, PiecewiseConstantDensity};
use acimsel::randmaps::{
    bgr_probabilities, brute_force_cex_search, evaluate_bgr_weights, evaluate_constant_weight_claim, selection_of, simulate_orbit,
    simulate_orbit_dithered, two_valued_selection_search, verify_cex_infeasibility, ProbabilityWeighting, RandomMap, GENERATOR,
};
use acimsel::rational::{format_q, Q};
use acimsel::selection::{
    betweenness_check, construct_conjugacy_selection, construct_selection, construct_tentlike_with, symmetric_slope_solver, BETWEENNESS_TOL,
};
use acimsel::transfer::{check_invariance, fp_apply_random};
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::args::{
    CheckCexArgs, Command, DensityArgs, DensityMethod, Format, Method, RandomAction, RandomSystem, ReproduceArgs, SelectArgs,
    TwoValuedArgs, VerifyArgs,
};
use crate::inputs;
use crate::run::{slug, CliError, CliResult, Run};

/// Cells used when closure branches are exported as tables.
const TABLE_CELLS: usize = 1024;

pub struct Ctx<'a> {
    pub out: &'a Path,
    pub format: Option<Format>,
    pub command: &'a Command,
}

impl Ctx<'_> {
    fn run(&self, name: &str) -> CliResult<Run> {
        Run::new(self.out, name, self.format, self.command)
    }
}

fn show(v: &[Q]) -> String {
    format!("[{}]", v.iter().map(format_q).collect::<Vec<_>>().join(", "))
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |k| k as f64 / n as f64)
}

fn fail(run: Run, check: &str, message: String) -> CliResult<()> {
    let report = run.path("report.json");
    run.finish(Some(check))?;
    Err(CliError::Numerical { message, report: Some(report) })
}

fn positive(name: &str, v: usize, min: usize) -> CliResult<()> {
    if v < min {
        return Err(CliError::Config(format!("--{name} must be at least {min}, got {v}")));
    }
    Ok(())
}

pub fn density(ctx: &Ctx, a: &DensityArgs) -> CliResult<()> {
    positive("samples", a.samples, 1)?;
    let map = inputs::map(&a.map)?;
    let mut run = ctx.run(&format!("density-{}", slug(&a.map)))?;
    let markov = match a.method {
        DensityMethod::Ulam => None,
        DensityMethod::Markov => Some(invariant_density(&map)?),
        DensityMethod::Auto => match invariant_density(&map) {
            Ok(d) => Some(d),
            Err(e) => {
                run.record("markov_unavailable", e.to_string());
                None
            }
        },
    };
    let (method, d, extra) = match markov {
        Some(d) => ("markov", d, Value::Null),
        None => {
            positive("bins", a.bins, 2)?;
            let u = ulam_stationary(&map, a.bins)?;
            let extra = json!({"bins": a.bins, "iterations": u.iterations, "residual": u.residual});
            ("ulam", u.to_density()?, extra)
        }
    };
    run.record("method", method);
    let cdf = DistributionFunction::from_density(&d);
    if run.json() {
        run.write_json("density.json", &json!({"map": a.map, "method": method, "density": d, "cdf": cdf, "ulam": extra}))?;
    }
    if run.csv() {
        run.write_csv("density.csv", &["x", "value"], grid(a.samples).map(|x| vec![x, d.eval_f64(x)]))?;
        run.write_csv("cdf.csv", &["x", "value"], grid(a.samples).map(|x| vec![x, cdf.eval(x)]))?;
    }
    println!("method {method}");
    if method == "markov" {
        println!("breakpoints {}", show(d.breakpoints()));
        println!("values {}", show(d.values()));
    } else {
        println!("ulam density on {} bins", d.values().len());
    }
    run.finish(None)?;
    Ok(())
}

pub fn select(ctx: &Ctx, a: &SelectArgs) -> CliResult<()> {
    let (lambda, lambda_record) = inputs::scalar(&a.lambda)?;
    if lambda <= Q::zero() || lambda >= Q::one() {
        return Err(CliError::Config(format!("--lambda {} must lie strictly between 0 and 1", a.lambda)));
    }
    positive("resolution", a.resolution, 16)?;
    positive("grid", a.grid, 16)?;
    positive("samples", a.samples, 1)?;
    let ex = inputs::envelope(&a.envelope)?;
    let method = format!("{:?}", a.method).to_lowercase();
    let mut run = ctx.run(&format!("select-{}-{}-{}", slug(&a.envelope), method, slug(&format_q(&lambda))))?;
    let mut extra = Value::Null;
    let result = match a.method {
        Method::Main => construct_selection(&ex.envelope, &ex.f1, &ex.f2, &lambda, a.resolution)?,
        Method::Tentlike => construct_tentlike_with(&ex.envelope, &ex.f1, &ex.f2, &lambda, a.resolution)?.0,
        Method::Conjugacy => {
            let h = match (&a.h, ex.id.as_str()) {
                (Some(spec), _) => inputs::cdf(spec)?,
                (None, "tent-phi2") => inputs::cdf("sec4/phi2")?,
                (None, _) => return Err(CliError::Config("--method conjugacy needs --h".into())),
            };
            construct_conjugacy_selection(ex.envelope.tau1(), &h, &lambda)?
        }
        Method::Slopes => {
            let s = symmetric_slope_solver(&lambda)?;
            extra = json!({
                "slope_magnitudes": s.magnitudes.iter().map(format_q).collect::<Vec<_>>(),
                "profile": s.profile,
                "target_density": s.target,
            });
            s.selection
        }
    };
    let inv = result.invariance(a.grid)?;
    let b = betweenness_check(&result.eta, &ex.envelope, a.grid)?;
    let crossing = ex.envelope.crossing().cloned();
    let report = json!({
        "envelope": ex.id,
        "method": method,
        "construction": result.construction,
        "lambda": lambda_record.clone(),
        "exact": result.exact,
        "invariance": inv,
        "betweenness": b,
        "envelope_crossing": crossing,
        "tolerances": {"invariance": a.tol, "betweenness": BETWEENNESS_TOL},
        "target_cdf": result.target_cdf,
        "details": extra,
    });
    run.record("inputs", json!({"lambda": lambda_record, "envelope": ex.id}));
    run.record("tolerances", json!({"invariance": a.tol, "betweenness": BETWEENNESS_TOL}));
    run.write_json("report.json", &report)?;
    if run.json() {
        run.write_json("eta.json", &MapDescription::of(&result.eta, TABLE_CELLS))?;
    }
    if run.csv() {
        let (t1, t2, eta) = (ex.envelope.tau1(), ex.envelope.tau2(), &result.eta);
        let rows = grid(a.samples)
            .map(|x| Ok(vec![x, t1.evaluate(x)?, t2.evaluate(x)?, eta.evaluate(x)?]))
            .collect::<acimsel::Result<Vec<_>>>()?;
        run.write_csv("graph.csv", &["x", "tau1", "tau2", "eta"], rows)?;
    }
    println!("construction {:?}, exact {}", result.construction, result.exact);
    println!("invariance sup_error {:.3e} at x = {:.6} ({} points)", inv.sup_error, inv.worst_point, inv.grid_size);
    println!(
        "betweenness lower {:.3e} at x = {:.6}, upper {:.3e} at x = {:.6}",
        b.lower_violation, b.lower_at, b.upper_violation, b.upper_at
    );
    if let Some(c) = &crossing {
        println!("envelope crossing: lower map exceeds upper by {:.3e} at x = {:.6}", c.excess, c.at);
    }
    if inv.sup_error > a.tol {
        return fail(run, "invariance", format!("sup_error {:.3e} exceeds {:.1e}", inv.sup_error, a.tol));
    }
    if crossing.is_none() && b.max_violation() > BETWEENNESS_TOL {
        return fail(run, "betweenness", format!("η leaves the envelope by {:.3e}", b.max_violation()));
    }
    run.finish(None)?;
    Ok(())
}

pub fn verify(ctx: &Ctx, a: &VerifyArgs) -> CliResult<()> {
    positive("grid", a.grid, 16)?;
    let map = inputs::map(&a.map)?;
    let f = inputs::cdf(&a.cdf)?;
    let mut run = ctx.run(&format!("verify-{}-{}", slug(&a.map), slug(&a.cdf)))?;
    let inv = check_invariance(&map, &f, a.grid)?;
    run.record("tolerances", json!({"invariance": a.tol}));
    run.write_json("report.json", &json!({"map": a.map, "cdf": a.cdf, "invariance": inv, "tolerance": a.tol}))?;
    println!("sup_error {:e}", inv.sup_error);
    println!("worst_point {}", inv.worst_point);
    if inv.exact {
        println!("exact: pushforward equals the distribution function");
    }
    if inv.sup_error > a.tol {
        return fail(run, "invariance", format!("sup_error {:.3e} exceeds {:.1e}", inv.sup_error, a.tol));
    }
    run.finish(None)?;
    Ok(())
}

struct System {
    rm: RandomMap,
    target: Option<PiecewiseConstantDensity>,
    record: Value,
}

fn system(s: &RandomSystem) -> CliResult<System> {
    let maps = s.maps.iter().map(|m| inputs::map(m)).collect::<CliResult<Vec<_>>>()?;
    let (weights, target, record): (ProbabilityWeighting, _, _) = match (&s.weights, &s.bgr) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let w: ProbabilityWeighting = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            w.validate()?;
            (w.clone(), None, json!({"weights": w}))
        }
        (None, Some(coeffs)) => {
            let parsed = coeffs.iter().map(|c| inputs::scalar(c)).collect::<CliResult<Vec<_>>>()?;
            let a: Vec<Q> = parsed.iter().map(|p| p.0.clone()).collect();
            let dens = match &s.densities {
                Some(ids) => ids.iter().map(|d| inputs::density(d)).collect::<CliResult<Vec<_>>>()?,
                None => maps.iter().map(invariant_density).collect::<acimsel::Result<Vec<_>>>()?,
            };
            let w = bgr_probabilities(&dens, &a)?;
            let mut target = dens[0].combine(&a[0], &dens[0], &Q::zero())?;
            for (d, c) in dens.iter().zip(&a).skip(1) {
                target = target.combine(&Q::one(), d, c)?;
            }
            let record = json!({"bgr": parsed.iter().map(|p| p.1.clone()).collect::<Vec<_>>(), "densities": dens, "weights": w});
            (w, Some(target), record)
        }
        (None, None) => return Err(CliError::Config("give --weights FILE or --bgr a1,a2,…".into())),
    };
    Ok(System { rm: RandomMap::new(maps, weights)?, target, record })
}

pub fn random(ctx: &Ctx, action: &RandomAction) -> CliResult<()> {
    match action {
        RandomAction::Simulate { system: s, n, seed, x0, dither, histogram } => {
            let sys = system(s)?;
            let mut run = ctx.run(&format!("random-simulate-{seed}"))?;
            run.record("seeds", json!({"orbit": seed}));
            run.record("generator", GENERATOR);
            run.record("system", &sys.record);
            let orbit = if *dither > 0.0 {
                simulate_orbit_dithered(&sys.rm, *x0, *n, *seed, *dither)?
            } else {
                simulate_orbit(&sys.rm, *x0, *n, *seed)?
            };
            match histogram {
                Some(bins) => {
                    positive("histogram", *bins, 1)?;
                    let mut counts = vec![0usize; *bins];
                    for &x in &orbit[1..] {
                        counts[((x * *bins as f64) as usize).min(bins - 1)] += 1;
                    }
                    let scale = *bins as f64 / (orbit.len() - 1).max(1) as f64;
                    let rows: Vec<Vec<f64>> = counts
                        .iter()
                        .enumerate()
                        .map(|(i, c)| vec![i as f64 / *bins as f64, (i + 1) as f64 / *bins as f64, *c as f64 * scale])
                        .collect();
                    if run.csv() {
                        run.write_csv("histogram.csv", &["lo", "hi", "density"], rows.clone())?;
                    }
                    if run.json() {
                        run.write_json("histogram.json", &json!({"bins": bins, "counts": counts}))?;
                    }
                }
                None => {
                    if run.csv() {
                        run.write_csv("orbit.csv", &["step", "x"], orbit.iter().enumerate().map(|(i, x)| vec![i as f64, *x]))?;
                    }
                    if run.json() {
                        run.write_json("orbit.json", &orbit)?;
                    }
                }
            }
            let ks = sys.target.as_ref().map(|t| ks_distance(&DistributionFunction::from_density(t), &orbit[1..]));
            run.write_json("report.json", &json!({"samples": n, "x0": x0, "dither": dither, "ks_to_target": ks}))?;
            if let Some(ks) = ks {
                println!("KS distance to the target {ks:.5} over {n} steps");
            } else {
                println!("simulated {n} steps");
            }
            run.finish(None)?;
        }
        RandomAction::Fp { system: s, density } => {
            let sys = system(s)?;
            let f = match (density, &sys.target) {
                (Some(spec), _) => inputs::density(spec)?,
                (None, Some(t)) => t.clone(),
                (None, None) => PiecewiseConstantDensity::uniform(),
            };
            let mut run = ctx.run("random-fp")?;
            run.record("system", &sys.record);
            let out = fp_apply_random(&sys.rm, &f)?;
            let fixed = out.same_density(&f);
            let (dev, at) = out.sup_distance(&f);
            run.write_json(
                "report.json",
                &json!({"input": f, "output": out, "fixed": fixed, "sup_deviation": format_q(&dev), "worst_point": format_q(&at)}),
            )?;
            println!("P f breakpoints {}", show(out.breakpoints()));
            println!("P f values {}", show(out.values()));
            println!("fixed {fixed}");
            run.finish(None)?;
        }
    }
    Ok(())
}

pub fn check_cex(ctx: &Ctx, a: &CheckCexArgs) -> CliResult<()> {
    let mut run = ctx.run("check-cex")?;
    run.record("seeds", json!({"candidates": a.seed}));
    run.record("generator", GENERATOR);
    let report = verify_cex_infeasibility()?;
    let (candidates, search) = brute_force_cex_search(a.candidates, a.seed)?;
    run.write_json("report.json", &report)?;
    run.write_json("candidates.json", &json!({"report": search, "candidates": candidates}))?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    run.finish(None)?;
    Ok(())
}

pub fn two_valued(ctx: &Ctx, a: &TwoValuedArgs) -> CliResult<()> {
    positive("grid", a.grid, 1)?;
    let ex = inputs::envelope(&a.envelope)?;
    let target = match a.target.as_str() {
        "f1" | "f2" => {
            let f = if a.target == "f1" { &ex.f1 } else { &ex.f2 };
            f.density().ok_or_else(|| CliError::Config(format!("{} of `{}` is not a step density", a.target, a.envelope)))?
        }
        spec => inputs::density(spec)?,
    };
    let mut run = ctx.run(&format!("two-valued-{}-{}", slug(&a.envelope), slug(&a.target)))?;
    let report = two_valued_selection_search(&ex.envelope, &target, a.grid)?;
    run.write_json("report.json", &report)?;
    if let Some(map) = selection_of(&report) {
        let map = map?;
        if run.json() {
            run.write_json("selection.json", &MapDescription::of(&map, TABLE_CELLS))?;
        }
    }
    println!("verdict {:?}", report.verdict);
    println!("{}", report.note);
    run.finish(None)?;
    Ok(())
}

pub fn reproduce(ctx: &Ctx, a: &ReproduceArgs) -> CliResult<()> {
    positive("resolution", a.resolution, 2)?;
    let names: Vec<&str> = if a.figure == "all" { FIGURES.to_vec() } else { vec![a.figure.as_str()] };
    let mut figures = Vec::new();
    let mut skipped = Vec::new();
    for name in names {
        match reproduce_figure(name, a.resolution) {
            Ok(f) => figures.push(f),
            Err(acimsel::Error::Unavailable { note, .. }) if a.figure == "all" => skipped.push(json!({"figure": name, "reason": note})),
            Err(e) => return Err(e.into()),
        }
    }
    let mut run = ctx.run(&format!("reproduce-{}", slug(&a.figure)))?;
    for fig in figures {
        let name = fig.name.as_str();
        if run.csv() {
            run.write_text(&format!("{name}.csv"), &fig.to_csv_string()?)?;
        }
        if run.json() {
            run.write_json(&format!("{name}.json"), &fig.description)?;
        }
        println!("{name}: {} points, columns {}", fig.x.len(), fig.header().join(","));
    }
    if !skipped.is_empty() {
        for s in &skipped {
            println!("{}: skipped ({})", s["figure"].as_str().unwrap_or_default(), s["reason"].as_str().unwrap_or_default());
        }
        run.record("skipped", skipped);
    }
    run.finish(None)?;
    Ok(())
}

pub fn claim_audit(ctx: &Ctx) -> CliResult<()> {
    let mut run = ctx.run("claim-audit")?;
    let constant = evaluate_constant_weight_claim()?;
    let bgr = evaluate_bgr_weights()?;
    run.write_json("report.json", &json!({"constant_weights": constant, "bgr_weights": bgr}))?;
    for a in [&constant, &bgr] {
        println!("{}: P1 = {} on {}; {}", a.claim, show(a.density.values()), show(a.density.breakpoints()), a.status);
    }
    run.finish(None)?;
    Ok(())
}
