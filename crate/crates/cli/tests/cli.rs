//! End-to-end runs of the binary on small files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dmtrace::{normal_trace, AtomicMeasure, CurveField, Point, PolygonalDomain};
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dmtrace"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn square() -> Value {
    json!({ "outer": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] })
}

fn frame() -> Value {
    json!({ "outer": [[-1.0, -1.0], [2.0, -1.0], [2.0, 2.0], [-1.0, 2.0]] })
}

fn chord() -> Value {
    json!({ "curves": [{ "weight": 2.0, "vertices": [[-1.0, 0.5], [2.0, 0.5]] }] })
}

#[test]
fn trace_of_a_chord() {
    let dir = tempfile::tempdir().unwrap();
    let (f, r) = (write(dir.path(), "f.json", &chord()), write(dir.path(), "r.json", &square()));
    let out = dir.path().join("m.json");
    let o = run(&["trace", "--field", f.to_str().unwrap(), "--region", r.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let m: AtomicMeasure<2> = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(m, AtomicMeasure::from_atoms([(Point([0.0, 0.5]), 2.0), (Point([1.0, 0.5]), -2.0)]));
}

#[test]
fn ae_norm_of_a_dirac() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", &json!({ "support": [{ "location": [0.3, 0.0], "coefficient": 1.0 }] }));
    let v = stdout_json(&run(&["ae-norm", "--element", m.to_str().unwrap()]));
    assert_eq!(v["value"], json!(1.0));
    assert!(v["dual"].as_array().unwrap().len() == 2);
}

#[test]
fn pairing_reports_the_duality_terms() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", &chord());
    let r = write(dir.path(), "r.json", &square());
    let phi = write(dir.path(), "phi.json", &json!({ "kind": "Linear", "direction": [1.0, 0.0] }));
    let v = stdout_json(&run(&["pairing", "--field", f.to_str().unwrap(), "--region", r.to_str().unwrap(), "--phi", phi.to_str().unwrap()]));
    let (p, t, d) = (v["pairing"].as_f64().unwrap(), v["trace_pairing"].as_f64().unwrap(), v["divergence_pairing"].as_f64().unwrap());
    assert_eq!(p, 2.0);
    assert_eq!(t, -p - d);

    let vector = write(dir.path(), "vec.json", &json!([{ "kind": "Const", "value": 1.0 }, { "kind": "Const", "value": 0.0 }]));
    let v = stdout_json(&run(&["pairing", "--field", f.to_str().unwrap(), "--vector", vector.to_str().unwrap(), "--quadrature-order", "4"]));
    assert!((v["pair_vector"].as_f64().unwrap() - 6.0).abs() < 1e-12);
}

#[test]
fn lift_output_reparses_and_has_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let preset = stdout_json(&run(&["domain-preset", "square"]));
    let d = write(dir.path(), "d.json", &preset);
    let m = write(
        dir.path(),
        "m.json",
        &json!({ "support": [{ "location": [0.0, 0.25], "coefficient": -1.0 }, { "location": [1.0, 0.75], "coefficient": 1.0 }] }),
    );
    let v = stdout_json(&run(&["lift", "--domain", d.to_str().unwrap(), "--element", m.to_str().unwrap()]));
    let field: CurveField<2> = serde_json::from_value(v["lift"]["field"].clone()).unwrap();
    let domain: PolygonalDomain = serde_json::from_value(preset).unwrap();
    let trace = normal_trace(&field, &domain.region).unwrap().normalized(1e-9);
    let expected = AtomicMeasure::from_atoms([(Point([0.0, 0.25]), -1.0), (Point([1.0, 0.75]), 1.0)]);
    assert!(trace.approx_eq(&expected, 1e-9));
    assert!(v["cost"].as_f64().unwrap() <= v["bound_constant"].as_f64().unwrap() * v["lift"]["norm"].as_f64().unwrap());
}

#[test]
fn extend_and_extend_divfree() {
    let dir = tempfile::tempdir().unwrap();
    let d = write(dir.path(), "d.json", &stdout_json(&run(&["domain-preset", "square"])));
    let b = write(dir.path(), "box.json", &frame());
    let f = write(dir.path(), "f.json", &json!({ "curves": [{ "weight": 1.0, "vertices": [[0.0, 0.3], [0.5, 0.5], [1.0, 0.4]] }] }));
    let args = ["--field", f.to_str().unwrap(), "--domain", d.to_str().unwrap(), "--box", b.to_str().unwrap()];
    let v = stdout_json(&run(&[&["extend"], &args[..]].concat()));
    assert_eq!(v["trace"].as_array().unwrap().len(), 2);
    let v = stdout_json(&run(&[&["extend-divfree"], &args[..]].concat()));
    assert_eq!(v["residual"], json!(0.0));
}

#[test]
fn slit_domain_exits_with_module_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = write(dir.path(), "slit.json", &stdout_json(&run(&["domain-preset", "slit"])));
    let b = write(dir.path(), "box.json", &frame());
    let f = write(dir.path(), "f.json", &json!({ "curves": [] }));
    let o = run(&["extend", "--field", f.to_str().unwrap(), "--domain", d.to_str().unwrap(), "--box", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("topology violation"));
}

#[test]
fn validation_errors_exit_with_one() {
    assert_eq!(run(&["trace", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["domain-preset", "hexagon"]).status.code(), Some(1));
    assert_eq!(run(&["smirnov-sim", "--field", "circle"]).status.code(), Some(1));
    assert_eq!(run(&["ae-norm", "--element", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(run(&["domain-preset", "square", "--eps", "3"]).status.code(), Some(1));
}

#[test]
fn decompose_writes_pieces() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        &json!({ "curves": [
            { "weight": 1.0, "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]] },
            { "weight": 1.0, "vertices": [[1.0, 1.0], [0.0, 0.0]] }
        ] }),
    );
    let v = stdout_json(&run(&["decompose", "--field", f.to_str().unwrap()]));
    let curves = v["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 1);
    assert_eq!(curves[0]["kind"], json!("cycle"));
    let lifted = stdout_json(&run(&["decompose", "--lifted", "--field", f.to_str().unwrap()]));
    let back: CurveField<2> = serde_json::from_value(lifted).unwrap();
    assert!(back.divergence().is_empty());
}

#[test]
fn smirnov_sim_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = run(&["smirnov-sim", "--field", "square-loop", "--seed", "7", "--samples", "500", "--grid-h", "0.04", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(v["report"]["samples"], json!(500));
}

#[test]
fn verify_a_single_criterion() {
    let v = stdout_json(&run(&["verify", "AC-3"]));
    assert_eq!(v["passed"], json!(true));
    assert_eq!(v["criteria"][0]["id"], json!("AC-3"));
    assert_eq!(run(&["verify", "AC-42"]).status.code(), Some(1));
}
