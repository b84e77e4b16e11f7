use serde_json::Value;
use std::process::{Command, Output};

fn sympidx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympidx"))
        .args(args)
        .env_remove("SYMPIDX_ARTIFACT_DIR")
        .output()
        .expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn path_doc(frames: &[[[f64; 2]; 2]], times: &[f64]) -> String {
    serde_json::json!({
        "schema_version": "symplectic-path/1",
        "half_dim": 1,
        "times": times,
        "frames": frames,
        "metadata": {},
    })
    .to_string()
}

#[test]
fn ellipsoid_example() {
    let o = sympidx(&["ellipsoid", "--lambdas", "1,2,3", "--orbit", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["mu_numeric"].as_f64().unwrap() - 12.0).abs() < 1e-6);
    assert_eq!(v["mu_closed_form"].as_f64(), Some(12.0));
}

#[test]
fn generated_documents_feed_the_other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = sympidx(&["ellipsoid", "--lambdas", "1,2,3", "--orbit", "2", "--out-dir", d]);
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("path.json");
    let o = sympidx(&["mean-index", "--path", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!((json(&o)["value"].as_f64().unwrap() + 6.0).abs() < 1e-6);
    let lp = dir.path().join("loop.json");
    let hol = dir.path().join("holonomy.json");
    let o = sympidx(&[
        "maslov",
        "--loop",
        lp.to_str().unwrap(),
        "--holonomy",
        hol.to_str().unwrap(),
        "--strategy",
        "both",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["block_assembly"].as_f64().unwrap() - 6.0).abs() < 1e-6);
    assert!(v["difference"].as_f64().unwrap() < 1e-6);
}

#[test]
fn broken_frame_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        path_doc(&[[[1.0, 0.0], [0.0, 1.0]], [[2.0, 0.0], [0.0, 1.0]]], &[0.0, 1.0]),
    )
    .unwrap();
    let o = sympidx(&["mean-index", "--path", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("frame 1 is not symplectic"), "{err}");
}

#[test]
fn unresolvable_phase_step_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let coarse = dir.path().join("coarse.json");
    let (c, s) = (3.0f64.cos(), 3.0f64.sin());
    std::fs::write(
        &coarse,
        path_doc(&[[[1.0, 0.0], [0.0, 1.0]], [[c, -s], [s, c]]], &[0.0, 1.0]),
    )
    .unwrap();
    let o = sympidx(&["mean-index", "--path", coarse.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn irrational_velocity_is_rejected() {
    let o = sympidx(&["flat-model", "--codim", "2", "--velocity", "1,pi"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sympidx(&["flat-model", "--codim", "2", "--velocity", "1,1/2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["projection_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn verify_failure_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("artifacts");
    let o = sympidx(&[
        "verify",
        "--suite",
        "cz-gap",
        "--cases",
        "3",
        "--dims",
        "1..1",
        "--tol",
        "gap=0.001",
        "--artifact-dir",
        d.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let v = json(&o);
    assert_eq!(v["pass"].as_bool(), Some(false));
    let name = v["failures"][0]["artifact"].as_str().unwrap();
    let repro: Value = serde_json::from_slice(&std::fs::read(d.join(name)).unwrap()).unwrap();
    assert_eq!(repro["schema_version"].as_str(), Some("verify-repro/1"));
}

#[test]
fn verify_is_deterministic() {
    let args = [
        "verify",
        "--suite",
        "rho-axioms,flat-model",
        "--cases",
        "20",
        "--seed",
        "9",
    ];
    let a = sympidx(&args);
    let b = sympidx(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(sympidx(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(sympidx(&["verify", "--cases", "0"]).status.code(), Some(2));
    assert_eq!(sympidx(&["verify", "--dims", "0..3"]).status.code(), Some(2));
    assert_eq!(sympidx(&["--help"]).status.code(), Some(0));
}
