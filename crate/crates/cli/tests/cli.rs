use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn quadfree(args: &[&str], file: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadfree"))
        .arg(args[0])
        .arg(data(file))
        .args(&args[1..])
        .env_remove("QUADFREE_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn report<'a>(doc: &'a Value, name: &str) -> &'a Value {
    doc["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"].as_str().unwrap().starts_with(name))
        .unwrap_or_else(|| panic!("no report {name}"))
}

/// `q(s)` straight from the instance file.
fn q_of(file: &str) -> impl Fn(&[f64]) -> f64 {
    let inst: Value = serde_json::from_str(&std::fs::read_to_string(data(file)).unwrap()).unwrap();
    let q: Vec<Vec<f64>> = inst["Q"].as_array().unwrap().iter().map(floats).collect();
    let b = floats(&inst["b"]);
    let c = inst["c"].as_f64().unwrap();
    move |s: &[f64]| {
        let mut v = c;
        for i in 0..s.len() {
            v += b[i] * s[i];
            for j in 0..s.len() {
                v += s[i] * q[i][j] * s[j];
            }
        }
        v
    }
}

#[test]
fn canon_reports_case_and_invariants() {
    let out = quadfree(&["canon"], "section6.json");
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["case"], "CASE2_CR");
    assert_eq!((doc["n"].as_u64(), doc["m"].as_u64(), doc["l"].as_u64()), (Some(2), Some(1), Some(0)));
    let a = floats(&doc["a"]);
    assert!((a.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    for key in ["identity", "hyperplane", "inverse"] {
        assert!(doc["checks"][key].as_f64().unwrap() < 1e-12, "{key}");
    }
    assert_eq!(doc["M"].as_array().unwrap().len(), 3);
    assert_eq!(doc["scale"]["eigenvalues"].as_array().unwrap().len(), 3);

    let doc = json(&quadfree(&["canon"], "hyperbola.json"));
    assert_eq!(doc["case"], "HOMOG_H_NONZERO");
}

#[test]
fn canon_not_separable_exits_2() {
    let out = quadfree(&["canon"], "inside_point.json");
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["case"], "NOT_SEPARABLE");
}

#[test]
fn parse_errors_exit_3() {
    for file in ["bad_key.json", "asymmetric.json", "missing.json"] {
        let out = quadfree(&["canon"], file);
        assert_eq!(out.status.code(), Some(3), "{file}");
        assert!(out.stdout.is_empty());
    }
    assert_eq!(quadfree(&["cut"], "inside_point.json").status.code(), Some(3));
    assert_eq!(quadfree(&["loop"], "section6.json").status.code(), Some(3));
    assert_eq!(quadfree(&["verify", "--free-set", "CSomething"], "section6.json").status.code(), Some(3));
}

#[test]
fn cut_is_violated_by_point_and_verifies() {
    let out = quadfree(&["cut"], "section6.json");
    assert!(out.status.success());
    let doc = json(&out);
    let coef = floats(&doc["cut"]["coef"]);
    let rhs = doc["cut"]["rhs"].as_f64().unwrap();
    let act = -2.0 * coef[0] - 2.0 * coef[1];
    assert!((act - rhs - 1.0).abs() < 1e-12);
    let steps: Vec<f64> = doc["steps"].as_array().unwrap().iter().map(|s| s["value"].as_f64().unwrap()).collect();
    assert!((steps[0] - (2.0 + std::f64::consts::SQRT_2)).abs() < 1e-9);
    // Both step endpoints lie on the boundary of the free set, inside S's complement.
    let q = q_of("section6.json");
    assert!(q(&[-2.0 + steps[0], -2.0]) > 0.0);

    let out = quadfree(&["verify", "--samples", "4000"], "section6.json");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["passed"], true);
    let rep = report(&doc, "cut_validity");
    assert!(rep["worst_residual"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn unit_steps_give_sum_cut() {
    let doc = json(&quadfree(&["cut"], "unit_steps.json"));
    for s in doc["steps"].as_array().unwrap() {
        assert!((s["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
    let coef = floats(&doc["cut"]["coef"]);
    assert!((coef[0] + 1.0).abs() < 1e-9 && (coef[1] + 1.0).abs() < 1e-9);
    assert!((doc["cut"]["rhs"].as_f64().unwrap() + 1.0).abs() < 1e-9);
}

#[test]
fn cut_error_exit_codes() {
    assert_eq!(quadfree(&["cut"], "recession.json").status.code(), Some(4));
    assert_eq!(quadfree(&["cut"], "empty.json").status.code(), Some(5));
    assert_eq!(quadfree(&["cut"], "inside_point.json").status.code(), Some(3));
}

#[test]
fn forced_cglambda_fails_on_tangent_instance() {
    let out = quadfree(&["verify", "--free-set", "CGLambda"], "tangent_line.json");
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["passed"], false);
    let rep = report(&doc, "freeness_homogeneous");
    assert_eq!(rep["passed"], false);
    let w = floats(&rep["witness"]);
    let canon = json(&quadfree(&["canon"], "tangent_line.json"));
    let (a, d) = (floats(&canon["a"]), floats(&canon["d"]));
    let (x, y) = w.split_at(2);
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    // On the line where the cone touches aᵀx + dᵀy = 0.
    assert!((nx - y[0].abs()).abs() < 1e-6);
    assert!((a[0] * x[0] + a[1] * x[1] + d[0] * y[0]).abs() < 1e-6);

    let built = quadfree(&["verify"], "tangent_line.json");
    assert!(built.status.success());
    assert_eq!(json(&built)["free_set"], "Halfspace");

    let forced = quadfree(&["verify", "--free-set", "CGLambda"], "section6.json");
    assert_eq!(forced.status.code(), Some(1));
    assert_eq!(report(&json(&forced), "freeness[CGLambda]")["passed"], false);
}

#[test]
fn lambda_neg_a_has_no_relaxation() {
    let out = quadfree(&["verify", "--samples", "2000"], "lambda_neg_a.json");
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["case"], "CASE2_CR_LAMBDA_NEG_A");
    assert_eq!(report(&doc, "relaxation_zero")["worst_residual"].as_f64(), Some(0.0));
}

#[test]
fn seed_env_overrides_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_quadfree"))
        .args(["verify", data("hyperbola.json").to_str().unwrap(), "--seed", "5", "--samples", "500"])
        .env("QUADFREE_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 77);
    let a = quadfree(&["verify", "--seed", "5", "--samples", "500"], "hyperbola.json");
    let b = quadfree(&["verify", "--seed", "5", "--samples", "500"], "hyperbola.json");
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn plot_2d_vertices_on_curves() {
    let out = quadfree(&["plot", "--layers", "S,built,CLambda"], "section6.json");
    assert!(out.status.success());
    let doc = json(&out);
    let text = std::fs::read(data("section6.json")).unwrap();
    let hash: String = Sha256::digest(&text).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(doc["metadata"]["instance_sha256"], hash.as_str());
    let layers = doc["layers"].as_array().unwrap();
    assert_eq!(layers.len(), 3);
    let q = q_of("section6.json");
    let s_layer = &layers[0];
    let mut count = 0;
    for line in s_layer["polylines"].as_array().unwrap() {
        for p in line.as_array().unwrap() {
            let p = floats(p);
            assert!(q(&p).abs() <= 1e-6);
            count += 1;
        }
    }
    assert!(count > 100);
    for layer in layers {
        assert!(layer["max_residual"].as_f64().unwrap() <= 1e-6);
        assert!(!layer["polylines"].as_array().unwrap().is_empty());
    }
    assert_eq!(layers[1]["free_set"], "CRPhiLambda");
}

#[test]
fn plot_3d_mesh_and_refusal() {
    let out = quadfree(&["plot", "--cells", "16"], "saddle3.json");
    assert!(out.status.success());
    let doc = json(&out);
    let q = q_of("saddle3.json");
    let mesh = &doc["layers"][0]["mesh"];
    let verts = mesh["vertices"].as_array().unwrap();
    assert!(!verts.is_empty());
    for v in verts {
        assert!(q(&floats(v)).abs() <= 1e-6);
    }
    for t in mesh["triangles"].as_array().unwrap() {
        assert!(t.as_array().unwrap().iter().all(|i| (i.as_u64().unwrap() as usize) < verts.len()));
    }
    assert!(doc["layers"][1]["max_residual"].as_f64().unwrap() <= 1e-6);

    let out = quadfree(&["plot"], "dim4.json");
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn loop_converges_with_monotone_objective() {
    let out = quadfree(&["loop", "--max-iters", "50"], "loop_toy.json");
    assert!(out.status.success());
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines[0]["kind"], "header");
    assert_eq!(lines[0]["sense"], "minimize");
    assert_eq!(lines[0]["objective_trend"], "nondecreasing");
    let iters: Vec<&Value> = lines.iter().filter(|l| l["kind"] == "iteration").collect();
    let objs: Vec<f64> = iters.iter().map(|l| l["objective"].as_f64().unwrap()).collect();
    assert!(objs.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    assert!(iters.last().unwrap()["violation"].as_f64().unwrap() <= 1e-6);
    let summary = lines.last().unwrap();
    assert_eq!(summary["stop"], "feasible");
    assert!(summary["cuts"].as_u64().unwrap() <= 50);
}

#[test]
fn loop_error_exit_codes() {
    assert_eq!(quadfree(&["loop"], "degenerate_vertex.json").status.code(), Some(7));
    assert_eq!(quadfree(&["loop"], "unbounded.json").status.code(), Some(6));
    assert_eq!(quadfree(&["loop"], "infeasible_lp.json").status.code(), Some(8));
}
