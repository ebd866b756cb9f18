use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_jensen-lab"));
    c.env_remove("JENSEN_LAB_SEED");
    c
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, v.to_string()).unwrap();
    p
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "bad stdout ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn diag(values: &[f64]) -> Value {
    let n = values.len();
    let re: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { values[i] } else { 0.0 }).collect())
        .collect();
    json!({"dim": n, "re": re})
}

fn diag_example(dir: &Path) -> (PathBuf, PathBuf) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let col = write(dir, "col.json", &json!({"n": 2, "m": 2, "blocks": [diag(&[h, h]), diag(&[h, h])]}));
    let xs = write(dir, "xs.json", &json!([diag(&[1.0, -1.0]), diag(&[0.0, 0.0])]));
    (col, xs)
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_eq5_on_diag_example() {
    let dir = TempDir::new().unwrap();
    let (col, xs) = diag_example(dir.path());
    let o = bin()
        .args(["verify", "--ineq", "eq5", "--fn", "square", "--col", arg(&col), "--xs", arg(&xs)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["holds"], json!(true));
    assert!((r["minEig"].as_f64().unwrap() - 0.25).abs() < 1e-14);
    assert!(r["context"].as_str().unwrap().starts_with("eq5#"));
}

#[test]
fn verify_eq6_zero_contraction_is_a_violation() {
    let dir = TempDir::new().unwrap();
    let col = write(dir.path(), "zero.json", &json!({"n": 1, "m": 1, "blocks": [diag(&[0.0])]}));
    let o = bin()
        .args(["verify", "--ineq", "eq6", "--fn", "shifted-square", "--col", arg(&col)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let r = stdout_json(&o);
    assert_eq!(r["holds"], json!(false));
    assert_eq!(r["minEig"].as_f64().unwrap(), -1.0);
}

#[test]
fn eq5_rejects_a_contractive_column() {
    let dir = TempDir::new().unwrap();
    let col = write(dir.path(), "half.json", &json!({"n": 1, "m": 1, "blocks": [diag(&[0.5])]}));
    let o = bin()
        .args(["verify", "--ineq", "eq5", "--fn", "square", "--col", arg(&col)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn probe_quartic_finds_counterexample() {
    let o = bin()
        .args([
            "probe", "--fn", "quartic", "--interval", "-2", "2", "--orders", "2", "--trials", "100000", "--seed", "7",
        ])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    let cex = r["counterexamples"].as_array().unwrap();
    assert!(!cex.is_empty());
    assert!(cex[0]["minEig"].as_f64().unwrap() < -1e-6);
    assert_eq!(r["config"]["seed"], json!(7));
}

#[test]
fn probe_square_is_clean_and_seed_comes_from_env() {
    let o = bin()
        .env("JENSEN_LAB_SEED", "42")
        .args(["probe", "--fn", "square", "--orders", "1,2,3", "--trials", "300"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["config"]["seed"], json!(42));
    assert_eq!(r["trialsExecuted"], json!(900));
    assert!(r["counterexamples"].as_array().unwrap().is_empty());
}

#[test]
fn out_flag_writes_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = bin()
        .args(["probe", "--fn", "abs", "--orders", "1", "--trials", "50", "--out", arg(&out)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["trialsExecuted"], json!(50));
}

#[test]
fn malformed_input_names_the_field() {
    let dir = TempDir::new().unwrap();
    let col = write(
        dir.path(),
        "col.json",
        &json!({"n": 2, "m": 2, "blocks": [diag(&[1.0, 1.0]), {"dim": 2, "re": [[1.0, 0.0], [0.0]]}]}),
    );
    let o = bin()
        .args(["verify", "--ineq", "eq5", "--fn", "square", "--col", arg(&col)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("blocks[1].re[1]"), "{err}");

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"n\": 1, \"m\": 1}").unwrap();
    let o = bin()
        .args(["verify", "--ineq", "eq5", "--fn", "square", "--col", arg(&bad)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("blocks"));
}

#[test]
fn unknown_function_and_missing_flags_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let (col, _) = diag_example(dir.path());
    let o = bin()
        .args(["verify", "--ineq", "eq5", "--fn", "nosuch", "--col", arg(&col)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["verify", "--ineq", "eq3", "--fn", "square"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["verify", "--ineq", "eq99"]).output().unwrap();
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn dilate_contractive_column() {
    let dir = TempDir::new().unwrap();
    let col = write(dir.path(), "c.json", &json!({"n": 2, "m": 1, "blocks": [diag(&[0.6]), diag(&[0.0])]}));
    let o = bin().args(["dilate", "--col", arg(&col)]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["augmented"], json!(true));
    assert_eq!(r["kind"], json!("contractive"));
    assert!(r["unitarityResidual"].as_f64().unwrap() < 1e-12);
    assert_eq!(r["unitary"]["dim"], json!(4));
}

#[test]
fn expect_table() {
    let dir = TempDir::new().unwrap();
    let state = write(dir.path(), "rho.json", &diag(&[0.5, 0.25, 0.25]));
    let y = write(dir.path(), "y.json", &diag(&[1.0, 2.0, 2.0]));
    let x = write(
        dir.path(),
        "x.json",
        &json!({"dim": 3, "re": [[3.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 5.0]]}),
    );
    let o = bin()
        .args(["expect", "--state", arg(&state), "--y", arg(&y), "--x", arg(&x)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    let pts = r["points"].as_array().unwrap();
    assert_eq!(pts.len(), 2);
    assert!((pts[0]["value"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!((pts[1]["value"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!((pts[1]["weight"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let flip = write(dir.path(), "flip.json", &json!({"dim": 3, "re": [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]}));
    let o = bin()
        .args(["expect", "--state", arg(&state), "--y", arg(&flip), "--x", arg(&x)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn trace_witness_abs_example() {
    let dir = TempDir::new().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let col = write(dir.path(), "col.json", &json!({"n": 2, "m": 2, "blocks": [diag(&[h, h]), diag(&[h, h])]}));
    let xs = write(
        dir.path(),
        "xs.json",
        &json!([diag(&[1.0, -1.0]), {"dim": 2, "re": [[0.0, 1.0], [1.0, 0.0]]}]),
    );
    let o = bin()
        .args(["trace-witness", "--fn", "abs", "--col", arg(&col), "--xs", arg(&xs)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert!((r["gap"].as_f64().unwrap() - (2.0 - 2f64.sqrt())).abs() < 1e-13);
    assert_eq!(r["witnesses"].as_array().unwrap().len(), 2);

    let o = bin()
        .args(["verify", "--ineq", "eq7", "--fn", "abs", "--col", arg(&col), "--xs", arg(&xs)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn chain_and_two_point() {
    let dir = TempDir::new().unwrap();
    let (col, xs) = diag_example(dir.path());
    let o = bin()
        .args(["verify", "--ineq", "chain16", "--fn", "square", "--col", arg(&col), "--xs", arg(&xs)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert!(r["steps"].as_array().unwrap().iter().all(|s| s["ok"] == json!(true)));

    let x = write(dir.path(), "x.json", &diag(&[0.0]));
    let y = write(dir.path(), "y.json", &diag(&[2.0]));
    let o = bin()
        .args(["verify", "--ineq", "twopoint", "--fn", "square", "--x", arg(&x), "--y", arg(&y), "--lambda", "0.5"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!((stdout_json(&o)["minEig"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let o = bin()
        .args(["verify", "--ineq", "eq3", "--fn", "negsquare", "--x", arg(&x), "--y", arg(&y), "--lambda", "0.5"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pinch_and_field() {
    let dir = TempDir::new().unwrap();
    let x = write(dir.path(), "x.json", &json!({"dim": 2, "re": [[1.0, 1.0], [1.0, -1.0]]}));
    let p = write(dir.path(), "p.json", &diag(&[1.0, 0.0]));
    let o = bin()
        .args(["verify", "--ineq", "pinch", "--fn", "square", "--x", arg(&x), "--p", arg(&p), "--s", "0"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    // p f(x) p − p f(pxp) p = 2 − 1
    assert!((stdout_json(&o)["minEig"].as_f64().unwrap()).abs() < 1e-12);

    let field = write(
        dir.path(),
        "field.json",
        &json!({"points": [
            {"w": 0.5, "a": diag(&[1.0, 1.0]), "x": diag(&[1.0, -1.0])},
            {"w": 0.5, "a": diag(&[1.0, 1.0]), "x": {"dim": 2, "re": [[0.0, 1.0], [1.0, 0.0]]}}
        ]}),
    );
    let o = bin()
        .args(["verify", "--ineq", "eq9", "--fn", "abs", "--field", arg(&field)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!((stdout_json(&o)["gap"].as_f64().unwrap() - (1.0 - 0.5 * 2f64.sqrt())).abs() < 1e-13);

    let alg = write(dir.path(), "alg.json", &json!({"blocks": [1, 1], "weights": [1.0, 2.0]}));
    let o = bin()
        .args(["verify", "--ineq", "eq9", "--fn", "abs", "--field", arg(&field), "--algebra", arg(&alg)])
        .output()
        .unwrap();
    // y = diag(1/2,−1/2) + flip/2 does not commute with diag(1, 2)
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tolerance_override() {
    let dir = TempDir::new().unwrap();
    let (col, xs) = diag_example(dir.path());
    let o = bin()
        .args(["--tol", "order=1e-8", "verify", "--ineq", "eq5", "--fn", "square", "--col", arg(&col), "--xs", arg(&xs)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = bin()
        .args(["--tol", "order=banana", "verify", "--ineq", "eq5", "--fn", "square", "--col", arg(&col)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bs_representation_file() {
    let dir = TempDir::new().unwrap();
    let rep = write(
        dir.path(),
        "rep.json",
        &json!({"beta0": 0.0, "beta1": 0.0, "beta2": 1.0, "atoms": [[0.0, 1.0]]}),
    );
    let o = bin()
        .args(["probe", "--bs", arg(&rep), "--interval", "-0.9", "0.9", "--orders", "2", "--trials", "200"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
