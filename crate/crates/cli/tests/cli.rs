use std::fs;
use std::path::Path;

use kovtop::main_with_args;

fn run_cli(dir: &Path, cmd: &str, config: &str) -> i32 {
    let cfg = dir.join("cfg.json");
    fs::write(&cfg, config).unwrap();
    main_with_args(["kovtop", cmd, "--config", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()])
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn classify_reports_two_real_two_imaginary() {
    let d = tempfile::tempdir().unwrap();
    let code = run_cli(d.path(), "classify", r#"{"classify": {"cases": [{"l1": -1.0, "k0": 1.0, "l0": 0.0}]}}"#);
    assert_eq!(code, 0);
    let r = report(d.path());
    let case = &r["results"]["cases"][0];
    assert_eq!(case["class"], "TwoRealTwoImaginary");
    assert_eq!(case["agrees"], true);
}

#[test]
fn theta_check_reference_succeeds() {
    let d = tempfile::tempdir().unwrap();
    let code = run_cli(d.path(), "theta-check", r#"{"theta": {"l1": 2.0, "l": 0.3, "c0": 0.5, "k": 1.0, "samples": 5}}"#);
    assert_eq!(code, 0);
    assert!(d.path().join("out/data.csv").exists());
    assert!(d.path().join("out/plot.gp").exists());
    assert!(d.path().join("out/timing.json").exists());
}

#[test]
fn unknown_key_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run_cli(d.path(), "simulate", r#"{"body": {"c0": 1.0}, "t_edn": 5.0}"#), 2);
}

#[test]
fn malformed_and_bad_values_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run_cli(d.path(), "simulate", "{not json"), 2);
    assert_eq!(run_cli(d.path(), "simulate", r#"{"body": {"c0": 1.0}, "tol": 1e-20}"#), 2);
    assert_eq!(run_cli(d.path(), "simulate", r#"{"body": {"c0": 1.0}, "t_end": 1e999}"#), 2);
    assert_eq!(run_cli(d.path(), "simulate", r#"{"body": {"c0": 1.0}, "output": {"csv": "../x.csv"}}"#), 2);
}

#[test]
fn regime_violation_exits_four() {
    let d = tempfile::tempdir().unwrap();
    // no four real branch points for these constants
    assert_eq!(run_cli(d.path(), "theta-check", r#"{"theta": {"l1": -1.0, "l": 0.0, "c0": 1.0, "k": 0.5}}"#), 4);
    // B1 = 2 C1 sits on the boundary of the admissible mounts
    assert_eq!(run_cli(d.path(), "design-model", r#"{"mount": {"a1": 2.0, "b1": 2.0, "c1": 1.0, "m": 1.0}}"#), 4);
}

#[test]
fn seed_flag_overrides_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.json");
    fs::write(&cfg, r#"{"body": {"c0": 1.0}, "t_end": 1.0, "seed": 3}"#).unwrap();
    let out = d.path().join("out");
    let code = main_with_args(["kovtop", "simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(code, 0);
    assert_eq!(report(d.path())["seed"], 9);
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in fs::read_dir(root).unwrap() {
        let p = entry.unwrap().path();
        let text = fs::read_to_string(&p).unwrap();
        assert!(kovtop::parse_config(&text).is_ok(), "{}", p.display());
    }
}
