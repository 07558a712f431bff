use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn carnot(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carnot"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("CARNOT_PRESET_DIR", presets())
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn assert_failure_report_matches(out: &Path, o: &Output) {
    let failure = out.join("failure.json");
    assert_eq!(failure.exists(), code(o) != 0, "failure report must exist iff the exit code is nonzero");
    if code(o) != 0 {
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(failure).unwrap()).unwrap();
        assert_eq!(v["exit_code"], code(o));
    }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn rumin_verify_heisenberg_passes() {
    let tmp = TempDir::new().unwrap();
    let preset = presets().join("heisenberg1.json");
    let o = carnot(tmp.path(), &["rumin", "verify", preset.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_failure_report_matches(tmp.path(), &o);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("verify.json")).unwrap()).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"].as_str().unwrap().contains("d_c") && c["passed"] == true));
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert_eq!(v["e0_dims"], serde_json::json!([1, 2, 2, 1]));
}

#[test]
fn broken_jacobi_exits_with_validation_failure() {
    let tmp = TempDir::new().unwrap();
    let bad = write(
        tmp.path(),
        "bad.json",
        r#"{"layers":[3,1,1],"brackets":[{"i":1,"j":2,"coeffs":{"4":"1"}},{"i":3,"j":4,"coeffs":{"5":"1"}}]}"#,
    );
    let o = carnot(tmp.path(), &["algebra", "validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_failure_report_matches(tmp.path(), &o);
}

#[test]
fn grading_violation_exits_with_validation_failure() {
    let tmp = TempDir::new().unwrap();
    let bad = write(tmp.path(), "bad.json", r#"{"layers":[2,1],"brackets":[{"i":1,"j":2,"coeffs":{"1":"1"}}]}"#);
    let o = carnot(tmp.path(), &["algebra", "validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_failure_report_matches(tmp.path(), &o);
}

#[test]
fn success_clears_a_stale_failure_report() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "failure.json", "{}");
    let o = carnot(tmp.path(), &["algebra", "validate", "engel"]);
    assert_eq!(code(&o), 0);
    assert_failure_report_matches(tmp.path(), &o);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["homogeneous_dimension"], 7);
}

#[test]
fn endpoint_exponent_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "cfg.json", r#"{"p": 1, "q": "4/3", "lambda": 2, "cutoff_radius": 0.75, "grid": 32, "seed": 1}"#);
    let o = carnot(tmp.path(), &["primitive", "run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert_failure_report_matches(tmp.path(), &o);
    assert!(!tmp.path().join("report.json").exists());
}

#[test]
fn unknown_verb_and_unsupported_format_are_usage_errors() {
    let tmp = TempDir::new().unwrap();
    let o = carnot(tmp.path(), &["frobnicate"]);
    assert_eq!(code(&o), 4);
    assert_failure_report_matches(tmp.path(), &o);
    let o = carnot(tmp.path(), &["group", "law", "heisenberg1", "--format", "csv"]);
    assert_eq!(code(&o), 4);
    let o = carnot(tmp.path(), &["rumin", "verify", "no-such-algebra"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn group_law_latex() {
    let tmp = TempDir::new().unwrap();
    let o = carnot(tmp.path(), &["group", "law", "heisenberg1", "--format", "latex"]);
    assert_eq!(code(&o), 0);
    let tex = String::from_utf8(o.stdout).unwrap();
    assert!(tex.contains(r"- \frac{1}{2}x_{2}y_{1} + \frac{1}{2}x_{1}y_{2}"), "{tex}");
}

#[test]
fn rumin_build_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        assert_eq!(code(&carnot(dir.path(), &["rumin", "build", "engel"])), 0);
    }
    let read = |d: &TempDir| fs::read(d.path().join("complex.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn calibrate_norm_heisenberg() {
    let tmp = TempDir::new().unwrap();
    let o = carnot(tmp.path(), &["group", "calibrate-norm", "heisenberg1", "--samples", "2000", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let eps = v["epsilons"].as_array().unwrap();
    assert_eq!(eps.len(), 2);
    assert_eq!(eps[0], 1.0);
    assert!(eps[1].as_f64().unwrap() > 0.0 && eps[1].as_f64().unwrap() <= 1.0);
}

#[test]
fn primitive_run_and_report_round_trip() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = write(
        a.path(),
        "cfg.json",
        r#"{"p": 2, "q": 4, "lambda": 2, "cutoff_radius": 0.75, "grid": 24, "seed": 5, "samples": 1,
            "kernel_constant": "closed_form"}"#,
    );
    for dir in [&a, &b] {
        let o = carnot(dir.path(), &["primitive", "run", cfg.to_str().unwrap(), "--threads", "1", "--fields"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert_failure_report_matches(dir.path(), &o);
    }
    let read = |d: &TempDir, n: &str| fs::read(d.path().join(n)).unwrap();
    assert_eq!(read(&a, "report.json"), read(&b, "report.json"));
    assert_eq!(read(&a, "fields/F_000.bin"), read(&b, "fields/F_000.bin"));
    let sidecar: serde_json::Value = serde_json::from_slice(&read(&a, "fields/F_000.json")).unwrap();
    assert_eq!(sidecar["components"], 2);
    assert_eq!(sidecar["shape"], serde_json::json!([24, 24, 24]));

    let o = carnot(a.path(), &["primitive", "report", a.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(o.stdout, read(&a, "report.csv"));
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["critical.json", "endpoint.json", "quick.json"] {
        let cfg = carnot_core::numerics::pipeline::ExperimentConfig::from_json_str(&fs::read_to_string(dir.join(name)).unwrap())
            .unwrap();
        cfg.validate(4.0).unwrap();
    }
}
