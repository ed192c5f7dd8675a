//! Subcommands. Each returns the JSON document to print, or a [`CliError`]
//! carrying the exit code.

use rand::Rng;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use quadfree::corefns::r_coefficient;
use quadfree::cutloop::{self, StopReason};
use quadfree::cuts::intersection_cut;
use quadfree::oracle::{self, unit_vector};
use quadfree::{
    build_free_set, canonicalize, CanonicalForm, CaseData, CaseTag, CutCertificate, Error, FreeSet,
    VerificationReport,
};

use crate::contour::{self, Grid};
use crate::instance::{InstanceFile, ParseError};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NOT_SEPARABLE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_ALL_RECESSION: i32 = 4;
pub const EXIT_EMPTY_S: i32 = 5;
pub const EXIT_UNBOUNDED_LP: i32 = 6;
pub const EXIT_DEGENERATE_VERTEX: i32 = 7;
pub const EXIT_INFEASIBLE_LP: i32 = 8;

/// Worst vertex residual accepted in plot layers.
pub const PLOT_TOL: f64 = 1e-6;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
    /// Printed to stdout before exiting, when present.
    pub output: Option<Value>,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), output: None }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::new(EXIT_PARSE, e.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotSeparable { .. } => EXIT_NOT_SEPARABLE,
            Error::InvalidInput(_) | Error::NonSymmetric { .. } => EXIT_PARSE,
            Error::AllRaysRecession => EXIT_ALL_RECESSION,
            Error::EmptyS => EXIT_EMPTY_S,
            Error::UnboundedLp => EXIT_UNBOUNDED_LP,
            Error::DegenerateVertex(_) => EXIT_DEGENERATE_VERTEX,
            Error::InfeasibleLp => EXIT_INFEASIBLE_LP,
            _ => EXIT_FAILURE,
        };
        CliError::new(code, e.to_string())
    }
}

pub type CmdResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone)]
pub struct Options {
    pub samples: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub layers: Option<Vec<String>>,
    pub tol: f64,
    pub free_set: Option<String>,
    pub extent: Option<f64>,
    pub cells: Option<usize>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            max_iters: 50,
            layers: None,
            tol: quadfree::DEFAULT_ZERO_TOL,
            free_set: None,
            extent: None,
            cells: None,
        }
    }
}

pub struct Loaded {
    pub instance: InstanceFile,
    pub hash: String,
}

pub fn load(text: &str) -> CmdResult<Loaded> {
    let instance = InstanceFile::parse(text)?;
    let hash = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    Ok(Loaded { instance, hash })
}

fn canonical(inst: &InstanceFile, tol: f64) -> CmdResult<CanonicalForm> {
    Ok(canonicalize(&inst.constraint()?, tol)?)
}

fn rows(m: &quadfree::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn canon_json(cf: &CanonicalForm, inst: &InstanceFile) -> Value {
    let w = cf.forward(&inst.point);
    let s2 = cf.scale.xy_scale * cf.scale.xy_scale;
    let identity = (cf.form(&w) - s2 * cf.q_point).abs() / (1.0 + cf.q_point.abs() * s2);
    let hyperplane = (cf.hyperplane(&w) + 1.0).abs();
    let eye = &cf.map * &cf.map_inv;
    let inverse = (eye - quadfree::DMatrix::identity(cf.p + 1, cf.p + 1)).abs().max();
    json!({
        "p": cf.p,
        "n": cf.n,
        "m": cf.m,
        "l": cf.l,
        "case": cf.case.as_str(),
        "a": cf.a,
        "d": cf.d,
        "h": cf.h,
        "lambda": cf.lambda,
        "point": cf.point,
        "q_point": cf.q_point,
        "M": rows(&cf.map),
        "scale": {
            "zero_tol": cf.scale.zero_tol,
            "eigenvalues": cf.scale.eigenvalues,
            "sigma": cf.scale.sigma,
            "permutation": cf.scale.permutation,
            "kappa": cf.scale.kappa,
            "xy_scale": cf.scale.xy_scale,
            "dropped_h_norm": cf.scale.dropped_h_norm,
        },
        "checks": {
            "identity": identity,
            "hyperplane": hyperplane,
            "inverse": inverse,
        },
    })
}

pub fn canon(inst: &InstanceFile, opts: &Options) -> CmdResult<Value> {
    let cf = canonical(inst, opts.tol)?;
    let out = canon_json(&cf, inst);
    if cf.case == CaseTag::NotSeparable {
        return Err(CliError {
            code: EXIT_NOT_SEPARABLE,
            message: format!("point satisfies the constraint, q = {:e}", cf.q_point),
            output: Some(out),
        });
    }
    Ok(out)
}

/// The built set, or the one named by `--free-set` on the case data of `cf`.
pub fn choose_free_set(cf: &CanonicalForm, name: Option<&str>) -> CmdResult<FreeSet> {
    match cf.case {
        CaseTag::NotSeparable => return Err(Error::NotSeparable { value: cf.q_point }.into()),
        CaseTag::EmptyS => return Err(Error::EmptyS.into()),
        _ => {}
    }
    let Some(name) = name.filter(|n| *n != "built") else {
        return Ok(build_free_set(cf)?);
    };
    let unit = || CaseData::unit(cf.lambda.clone(), cf.a.clone(), cf.d.clone());
    let core = match name {
        "CLambda" => FreeSet::CLambda { lambda: cf.lambda.clone() },
        "CGLambda" => FreeSet::CGLambda(CaseData::new(cf.lambda.clone(), cf.a.clone(), cf.d.clone())?),
        "CPhiLambda" => FreeSet::CPhiLambda(unit()?),
        "CRPhiLambda" => FreeSet::CRPhiLambda(unit()?),
        other => {
            return Err(CliError::new(
                EXIT_PARSE,
                format!("unknown free set {other:?}; expected built, CLambda, CGLambda, CPhiLambda or CRPhiLambda"),
            ))
        }
    };
    // Sets in (x, y) ignore z, which also covers a nonzero h.
    let l = cf.p + 1 - cf.n - cf.m;
    Ok(if l > 0 { FreeSet::CylinderLift { inner: Box::new(core), l } } else { core })
}

fn cut_json(cert: &CutCertificate, inst: &InstanceFile) -> Value {
    let steps: Vec<Value> = cert
        .steps
        .iter()
        .map(|s| json!({ "value": if s.is_finite() { json!(s.value) } else { Value::Null }, "residual": s.residual }))
        .collect();
    json!({
        "case": cert.canonical.as_ref().map(|cf| cf.case.as_str()),
        "free_set": cert.free_set.core().name(),
        "apex": cert.apex,
        "rays": rows(&cert.rays.transpose()),
        "steps": steps,
        "weights": cert.weights,
        "cut": { "coef": cert.coef, "sense": "<=", "rhs": cert.rhs },
        "apex_violation": cert.apex_violation,
        "q_point": inst.eval(&inst.point),
    })
}

pub fn cut(inst: &InstanceFile, opts: &Options) -> CmdResult<Value> {
    let cone = inst
        .cone()
        .ok_or_else(|| CliError::new(EXIT_PARSE, "instance has no cone"))??;
    let cf = canonical(inst, opts.tol)?;
    let fs = choose_free_set(&cf, opts.free_set.as_deref())?;
    let cert = intersection_cut(&cone, &cf, &fs)?;
    Ok(cut_json(&cert, inst))
}

fn report_json(r: &VerificationReport) -> Value {
    let details: Map<String, Value> = r.details.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    json!({
        "name": r.name,
        "passed": r.passed,
        "samples": r.samples,
        "worst_residual": r.worst_residual,
        "tolerance": r.tolerance,
        "witness": r.witness,
        "seed": r.seed,
        "details": details,
    })
}

/// Worst-of aggregation for suites run over many β.
fn aggregate(name: &str, reports: Vec<VerificationReport>, tolerance: f64) -> Option<VerificationReport> {
    if reports.is_empty() {
        return None;
    }
    let worst = reports
        .iter()
        .max_by(|a, b| a.worst_residual.total_cmp(&b.worst_residual))
        .cloned()
        .expect("nonempty");
    let failing = reports.iter().find(|r| !r.passed);
    Some(VerificationReport {
        name: name.to_string(),
        samples: reports.len(),
        worst_residual: worst.worst_residual,
        tolerance,
        passed: failing.is_none(),
        witness: failing.and_then(|r| r.witness.clone()),
        seed: None,
        details: failing.unwrap_or(&worst).details.clone(),
    })
}

fn with_seed(mut r: VerificationReport, seed: u64) -> VerificationReport {
    r.seed = Some(seed);
    r
}

pub fn verify(inst: &InstanceFile, opts: &Options) -> CmdResult<Value> {
    let cf = canonical(inst, opts.tol)?;
    let fs = choose_free_set(&cf, opts.free_set.as_deref())?;
    let n = opts.samples.max(1);
    let seed = opts.seed;
    let mut reports = Vec::new();

    let apex = fs.margin(&cf.point);
    reports.push(VerificationReport {
        name: "apex_interior".into(),
        samples: 1,
        worst_residual: apex,
        tolerance: 0.0,
        passed: apex < 0.0,
        witness: None,
        seed: None,
        details: Vec::new(),
    });

    let mut samples = oracle::sample_s(&cf, n / 2, seed).unwrap_or_default();
    let rest = n - samples.len();
    samples.extend(oracle::sample_s_extreme(&cf, rest, seed.wrapping_add(1)).unwrap_or_default());
    let mut rep = with_seed(oracle::check_freeness(&fs, &samples), seed);
    rep.details.push(("requested".into(), n as f64));
    reports.push(rep);

    let core = fs.core();
    if let FreeSet::CGLambda(cd) | FreeSet::CPhiLambda(cd) = core {
        // These sets are also free for the homogeneous cone cut by aᵀx + dᵀy ≤ 0.
        let k = n - n / 10;
        let mut hs = oracle::sample_homogeneous(cd, k, seed.wrapping_add(2)).unwrap_or_default();
        hs.extend(oracle::fiber_extremes(cd, n - k, seed.wrapping_add(3), 10_000));
        let name = format!("freeness_homogeneous[{}]", core.name());
        reports.push(with_seed(oracle::check_freeness_with(&name, &hs, |w| core.margin(w)), seed));
    }

    if let Some(cd) = fs.case_data().filter(|cd| cd.unit) {
        let mut rng = oracle::rng(seed.wrapping_add(4));
        let k = (n / 10).clamp(1, 1_000);
        let ys: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let r = rng.random_range(0.1..10.0);
                unit_vector(&mut rng, cd.m()).iter().map(|v| v * r).collect()
            })
            .collect();
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = ys.iter().cloned().zip(ys.iter().rev().cloned()).collect();
        reports.push(oracle::check_duality(cd, &ys));
        reports.push(oracle::check_convexity(cd, &pairs));
        reports.push(oracle::check_gradient(cd, &ys));

        let betas: Vec<Vec<f64>> = (0..k.min(200)).map(|_| unit_vector(&mut rng, cd.m())).collect();
        let witnesses: Vec<VerificationReport> = betas
            .iter()
            .filter(|b| cd.la + dot(&cd.d, b) < -1e-6)
            .filter_map(|b| oracle::exposing_witness(cd, b, core).ok().map(|(_, r)| r))
            .collect();
        reports.extend(aggregate("exposing_witnesses", witnesses, oracle::IDENTITY_TOL));
        if matches!(core, FreeSet::CRPhiLambda(_)) {
            let seqs: Vec<VerificationReport> = betas
                .iter()
                .filter(|b| cd.la + dot(&cd.d, b) >= 0.0)
                .filter_map(|b| oracle::asymptote_sequence(cd, b, 1_000).ok().map(|(_, r)| r))
                .collect();
            reports.extend(aggregate("asymptote_sequences", seqs, 10.0 / 1_000.0));
        }
        if cd.lambda_is_neg_a() {
            let worst = betas
                .iter()
                .map(|b| r_coefficient(cd, b).unwrap_or(f64::INFINITY).abs())
                .fold(0.0_f64, f64::max);
            reports.push(VerificationReport {
                name: "relaxation_zero".into(),
                samples: betas.len(),
                worst_residual: worst,
                tolerance: 0.0,
                passed: worst == 0.0,
                witness: None,
                seed: None,
                details: Vec::new(),
            });
        }
    }

    if let Some(cone) = inst.cone() {
        let cone = cone?;
        match intersection_cut(&cone, &cf, &fs) {
            Ok(cert) => {
                let pts: Vec<Vec<f64>> = oracle::sample_original(&cf, n, seed.wrapping_add(5))
                    .unwrap_or_default()
                    .into_iter()
                    .filter(|s| cone.contains(s, 0.0))
                    .collect();
                let mut rep = with_seed(oracle::check_cut_validity(&cert, &pts), seed);
                rep.passed &= cert.apex_violation > 0.0;
                reports.push(rep);
            }
            Err(e) => {
                eprintln!("cut construction failed: {e}");
                reports.push(VerificationReport {
                    name: "cut_validity".into(),
                    samples: 0,
                    worst_residual: f64::NAN,
                    tolerance: oracle::FREENESS_TOL,
                    passed: false,
                    witness: None,
                    seed: Some(seed),
                    details: Vec::new(),
                });
            }
        }
    }

    let passed = reports.iter().all(|r| r.passed);
    let out = json!({
        "case": cf.case.as_str(),
        "free_set": core.name(),
        "seed": seed,
        "samples": n,
        "passed": passed,
        "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
    });
    if passed {
        Ok(out)
    } else {
        let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
        Err(CliError { code: EXIT_FAILURE, message: format!("failed: {}", failed.join(", ")), output: Some(out) })
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn plot(inst: &InstanceFile, opts: &Options, hash: &str) -> CmdResult<Value> {
    let p = inst.dim;
    if !(2..=3).contains(&p) {
        return Err(CliError::new(EXIT_FAILURE, format!("plotting needs dim 2 or 3, got {p}")));
    }
    let cf = canonical(inst, opts.tol)?;
    let names = opts.layers.clone().unwrap_or_else(|| vec!["S".into(), "built".into()]);
    let extent = opts.extent.unwrap_or_else(|| {
        let m = inst.point.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        2.0 * m.max(1.0)
    });
    let cells = opts.cells.unwrap_or(if p == 2 { 200 } else { 40 });
    let grid = Grid { lo: vec![-extent; p], hi: vec![extent; p], cells };
    let mut layers = Vec::new();
    for name in &names {
        let (equation, set_name, field): (&str, Option<&str>, Box<dyn Fn(&[f64]) -> f64>) = if name == "S" {
            ("q = 0", None, Box::new(|s: &[f64]| inst.eval(s)))
        } else {
            let fs = match choose_free_set(&cf, Some(name)) {
                Ok(fs) => fs,
                Err(e) if e.code == EXIT_PARSE => return Err(e),
                Err(e) => {
                    eprintln!("layer {name} skipped: {}", e.message);
                    layers.push(json!({ "name": name, "skipped": e.message }));
                    continue;
                }
            };
            let set_name = fs.core().name();
            let cf = &cf;
            ("margin = 0", Some(set_name), Box::new(move |s: &[f64]| fs.margin(&cf.forward(s))))
        };
        let mut layer = Map::new();
        layer.insert("name".into(), json!(name));
        layer.insert("equation".into(), json!(equation));
        layer.insert("free_set".into(), json!(set_name));
        let stats = if p == 2 {
            let (lines, stats) = contour::marching_squares(&field, &grid, PLOT_TOL);
            layer.insert("polylines".into(), json!(lines));
            stats
        } else {
            let (mesh, stats) = contour::marching_tetrahedra(&field, &grid, PLOT_TOL);
            layer.insert("mesh".into(), json!({ "vertices": mesh.vertices, "triangles": mesh.triangles }));
            stats
        };
        layer.insert("max_residual".into(), json!(stats.max_residual));
        layer.insert("dropped_crossings".into(), json!(stats.dropped));
        layers.push(Value::Object(layer));
    }
    Ok(json!({
        "metadata": {
            "instance_sha256": hash,
            "seed": opts.seed,
            "dim": p,
            "case": cf.case.as_str(),
            "point": inst.point,
            "bounds": { "lo": grid.lo, "hi": grid.hi },
            "cells": cells,
            "tolerance": PLOT_TOL,
        },
        "layers": layers,
    }))
}

/// Runs the cutting loop, handing each JSON line to `emit` as it is produced.
pub fn run_loop<E: FnMut(Value)>(inst: &InstanceFile, opts: &Options, mut emit: E) -> CmdResult<()> {
    let lp = inst.lp()?;
    emit(json!({
        "kind": "header",
        "sense": "minimize",
        "objective_trend": "nondecreasing",
        "max_iters": opts.max_iters,
        "feasibility_tol": cutloop::FEASIBILITY_TOL,
        "objective": lp.objective,
    }));
    let mut prev = f64::NEG_INFINITY;
    let mut monotone = true;
    let outcome = cutloop::run(&inst.q_matrix(), &inst.b, inst.c, &lp, opts.max_iters, opts.tol, |it| {
        monotone &= it.objective >= prev - 1e-9;
        prev = it.objective;
        emit(json!({
            "kind": "iteration",
            "iter": it.iter,
            "objective": it.objective,
            "violation": it.violation,
            "point": it.point,
            "cut": it.cut.as_ref().map(|(coef, rhs)| json!({ "coef": coef, "sense": "<=", "rhs": rhs })),
        }));
    })?;
    emit(json!({
        "kind": "summary",
        "stop": match outcome.stop {
            StopReason::Feasible => "feasible",
            StopReason::IterationLimit => "iteration_limit",
        },
        "cuts": outcome.cuts,
        "monotone": monotone,
        "final_violation": outcome.iterations.last().map(|it| it.violation),
    }));
    Ok(())
}
