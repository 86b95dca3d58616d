use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gibbslab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbslab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn analyze_binary_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = gibbslab(&["analyze", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let variance: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/variance.json")).unwrap()).unwrap();
    let entries = variance.as_array().unwrap();
    // two indicator functions under four policies
    assert_eq!(entries.len(), 8);
    let dg = entries.iter().find(|e| e["function"] == "x2_is_0" && e["closed_form"]["policy"]["kind"] == "DG").unwrap();
    assert_eq!(dg["closed_form"]["V"].as_f64().unwrap(), 1.0625);
    let rates: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/rates.json")).unwrap()).unwrap();
    assert_eq!(rates["rates"].as_array().unwrap().len(), 4);
    assert!(fs::read_to_string(dir.path().join("o/orderings.csv")).unwrap().starts_with("ordering,"));
}

#[test]
fn product_target_exits_with_assumption_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", r#"{"target":{"type":"finite","joint":[[0.2,0.3],[0.2,0.3]]}}"#);
    let out = gibbslab(&["analyze", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("independent components: M = {0}"));
}

#[test]
fn reducible_target_exits_with_assumption_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.json", r#"{"target":{"type":"finite","joint":[[0.5,0.0],[0.0,0.5]]}}"#);
    let out = gibbslab(&["analyze", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reducible target"));
}

#[test]
fn invalid_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_r = write(dir.path(), "r.json", r#"{"target":{"type":"builtin","name":"binary06"},"policies":[{"kind":"RG","r":1.2}]}"#);
    let out = gibbslab(&["analyze", "--config", &bad_r], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r = 1.2"));

    let unknown = write(dir.path(), "u.json", r#"{"target":{"type":"builtin","name":"binary06"},"extra":true}"#);
    assert_eq!(gibbslab(&["analyze", "--config", &unknown], dir.path()).status.code(), Some(1));
    assert_eq!(gibbslab(&["analyze", "--config", "missing.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn seeded_simulation_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"target":{"type":"builtin","name":"binary06"},"simulation":{"T":20000,"seed":9,"replicates":2}}"#,
    );
    for o in ["a", "b"] {
        assert!(gibbslab(&["simulate", "--config", &cfg, "--out", o], dir.path()).status.success());
    }
    for f in ["simulate.json", "replicates.csv"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap());
    }
    assert!(gibbslab(&["simulate", "--config", &cfg, "--out", "c", "--seed", "10"], dir.path()).status.success());
    assert_ne!(fs::read(dir.path().join("a/simulate.json")).unwrap(), fs::read(dir.path().join("c/simulate.json")).unwrap());
}

#[test]
fn simulate_accepts_run_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write(
        dir.path(),
        "m.json",
        r#"{"target":{"type":"builtin","name":"binary06"},"policy":{"kind":"MDG","l":2},"T":20000,"seed":1}"#,
    );
    let out = gibbslab(&["simulate", "--config", &manifest, "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/simulate.json")).unwrap()).unwrap();
    assert_eq!(report["policies"].as_array().unwrap().len(), 1);
}

#[test]
fn validate_filter_and_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = gibbslab(&["validate", "--filter", "rates", "--out", "o"], dir.path());
    assert!(out.status.success());
    let table = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<&str> = table.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert!(!rows.is_empty() && rows.iter().all(|l| l.contains(" rates ")));

    let out = gibbslab(&["validate", "--filter", "orderings", "--inject-fault", "--out", "f"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("FAIL  orderings   sigma Loewner orderings"), "{table}");
    assert!(table.contains("violated: SD <= m2(1) SM(1)"));
}

#[test]
fn curves_and_sharpness_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(gibbslab(&["curves", "--out", "c"], dir.path()).status.success());
    let k = fs::read_to_string(dir.path().join("c/k_curves.csv")).unwrap();
    assert_eq!(k.lines().count(), 100);
    let opt = fs::read_to_string(dir.path().join("c/optimal_r.csv")).unwrap();
    assert!(opt.lines().any(|l| l.starts_with("1,0.5,")));
    assert!(dir.path().join("c/distance_DG_0_0.csv").exists());

    assert!(gibbslab(&["sharpness", "--out", "s"], dir.path()).status.success());
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s/sharpness.json")).unwrap()).unwrap();
    assert!(s["witness"]["ratio"].as_f64().unwrap() > s["eta"].as_f64().unwrap());
}
