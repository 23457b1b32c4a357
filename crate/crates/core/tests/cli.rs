use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffdistlab"))
        .args(args)
        .env_remove("FFDISTLAB_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn audit_variety_on_the_unit_circle() {
    let v = json(&["audit-variety", "--q", "3", "--d", "2", "--variety", "sphere:1"]);
    assert!((v["size_ratio"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    // 3^{3/2} · 2/9
    let expected = 27f64.sqrt() * 2.0 / 9.0;
    assert!((v["decay_constant"].as_f64().unwrap() - expected).abs() < 1e-9);
    assert_eq!(v["t_v"], 1);
}

#[test]
fn energy_of_two_points() {
    let v = json(&["energy", "--q", "3", "--d", "2", "--k", "2", "--points", "0,0;1,0"]);
    assert_eq!(v["energy"], 6);
    assert_eq!(v["spectral_energy"], 6);
    let out = run(&["energy", "--q", "3", "--d", "2", "--k", "3", "--points", "0,0;1,0", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "k,size,energy,spectral_energy\n3,2,22,22\n");
}

#[test]
fn energy_over_an_extension_field() {
    // F_9 = F_3[t]/(t^2+1); the whole plane has E_2 = 81^3.
    let v = json(&["energy", "--q", "9", "--ext-modulus", "1,0,1", "--d", "2", "--variety", "hyperplane"]);
    assert_eq!(v["energy"], 9u64.pow(3));
}

#[test]
fn distance_sets() {
    let v = json(&["distset", "--q", "3", "--d", "2", "--variety", "sphere:1"]);
    assert_eq!(v["values"], serde_json::json!([0, 1, 2]));
    let v = json(&["distset", "--q", "3", "--d", "2", "--points", "1,0;0,1", "--kind", "dot"]);
    assert_eq!(v["values"], serde_json::json!([0, 1]));
    let v = json(&["distset", "--q", "3", "--d", "2", "--points", "1,0", "--kind", "diff", "--no-diagonal"]);
    assert_eq!(v["count"], 0);
}

#[test]
fn verify_passes_and_detects_faults() {
    let out = run(&["verify", "--sets", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);

    let out = run(&["verify", "--q", "3", "--d", "2", "--sets", "2", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("identity violated") && err.contains("A={"), "{err}");
}

#[test]
fn scan_output_is_reproducible() {
    let args = [
        "scan", "--q", "5", "--d", "4", "--k", "3", "--variety", "sphere:1", "--rule", "even-sphere-k3", "--sizes",
        "2,4,8,16,32", "--samples", "8", "--seed", "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("size,log_q_size,subsets,exhaustive,"));
    assert_eq!(text.lines().count(), 6);
    assert!(!text.contains('\r'));
}

#[test]
fn audit_lemma_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("audit.json");
    let out = run(&[
        "audit-lemma", "--q", "5", "--d", "4", "--lemma", "energy-induction", "--k", "3", "--samples", "10",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["lemma"], "energy-induction");
    assert_eq!(v["instances"], 10);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 16);
}

#[test]
fn polynomial_variety_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("circle.txt");
    std::fs::write(&path, "# unit circle\nx1^2 + x2^2 - 1\n").unwrap();
    let spec = format!("poly:{}", path.display());
    let v = json(&["audit-variety", "--q", "3", "--d", "2", "--variety", &spec]);
    assert_eq!(v["size_profile"]["size"], 4);
    assert_eq!(v["declared_dim"], 1);
}

#[test]
fn threshold_values() {
    let v = json(&["threshold", "--rule", "affine-k3", "--d", "3", "--n", "2", "--k", "3"]);
    assert_eq!(v["exponent"], "4/3");
    let v = json(&["threshold", "--rule", "even-sphere", "--d", "4", "--k", "4"]);
    assert_eq!(v["exponent"], "13/8");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["energy", "--q", "4", "--d", "2", "--points", "0,0"]).status.code(), Some(2));
    assert_eq!(run(&["scan", "--q", "5", "--d", "3", "--rule", "even-sphere-k3"]).status.code(), Some(2));
    assert_eq!(run(&["audit-lemma", "--q", "5", "--d", "4", "--lemma", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let budget = Command::new(env!("CARGO_BIN_EXE_ffdistlab"))
        .args(["energy", "--q", "5", "--d", "3", "--variety", "sphere:1"])
        .env("FFDISTLAB_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(budget.status.code(), Some(3));
}
