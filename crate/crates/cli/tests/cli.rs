use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use glider_core::guidance::SCHEDULE_BLOCK;
use glider_core::sim::{MetricsReport, ScenarioConfig, SimLog};

fn configs() -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs"].iter().collect()
}

fn glider(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_glider-sim"));
    cmd.args(args).env_remove("GLIDER_OUT_DIR");
    cmd
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn case1() -> String {
    configs().join("case1.toml").display().to_string()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn missing_config_is_a_config_error() {
    let (code, _, err) = run(&mut glider(&["validate-gains", "no/such/file.toml"]));
    assert_eq!(code, 2);
    assert!(err.contains("hint"), "{err}");
}

#[test]
fn bad_override_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let (code, _, err) = run(&mut glider(&["run", &case1(), "--set", "dt=-0.01", "--out", &out]));
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = run(&mut glider(&[
        "run",
        &case1(),
        "--set",
        "no_equals_sign",
        "--out",
        &out,
    ]));
    assert_eq!(code, 2);
}

#[test]
fn validate_gains_reports_each_rule() {
    let (code, out, _) = run(&mut glider(&["validate-gains", &case1()]));
    assert_eq!(code, 0);
    let starts: Vec<_> = out.lines().filter(|l| l.contains("envelope-start")).collect();
    assert_eq!(starts.len(), 3);
    assert!(starts.iter().all(|l| l.starts_with("PASS")));
    assert!(out.lines().any(|l| l.contains("observer-gain-set")));
    assert!(out.lines().any(|l| l.contains("sliding-gain-ratio")));
}

#[test]
fn export_uses_the_output_directory_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(glider(&["export-ftpf", &case1()]).env("GLIDER_OUT_DIR", dir.path()));
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.path().join("ftpf.csv")).unwrap();
    assert_eq!(text.lines().count(), 3001);
}

#[test]
fn short_run_writes_logs_and_matching_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let (code, stdout, err) = run(&mut glider(&[
        "run",
        &case1(),
        "--set",
        "horizon=20",
        "--controllers",
        "smc,fxtppc",
        "--out",
        &out,
    ]));
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("fxtppc"));
    let cfg = ScenarioConfig::load(Path::new(&case1()), &["horizon=20".to_string()]).unwrap();
    let doc = read_json(&dir.path().join("metrics.json"));
    assert_eq!(doc["horizon"], 20.0);
    for name in ["smc", "fxtppc"] {
        let csv = std::fs::File::open(dir.path().join(format!("{name}_log.csv"))).unwrap();
        let log = SimLog::read_csv(csv).unwrap();
        assert_eq!(log.records.len(), 2000);
        let metrics = MetricsReport::from_log(&log, &cfg.fxtppc, SCHEDULE_BLOCK).unwrap();
        assert_eq!(doc["runs"][name], serde_json::to_value(&metrics).unwrap(), "{name}");
    }
    assert!(!dir.path().join("ppc_log.csv").exists());
}

#[test]
fn aborted_run_exits_with_its_own_code_and_keeps_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(case1())
        .unwrap()
        .replace(
            "pose = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]",
            "pose = [0.0, 0.0, 0.0, 0.0, 1.55, 0.0]",
        )
        .replace(
            "nu = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]",
            "nu = [0.0, 0.0, 0.0, 0.0, 0.5, 0.0]",
        );
    let cfg = dir.path().join("tumble.toml");
    std::fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    let (code, _, err) = run(glider(&[
        "run",
        cfg.to_str().unwrap(),
        "--set",
        "horizon=10",
        "--controllers",
        "fxtppc",
    ])
    .env("GLIDER_OUT_DIR", &out));
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("aborted"));
    let log = SimLog::read_csv(std::fs::File::open(out.join("fxtppc_log.csv")).unwrap()).unwrap();
    assert!(!log.records.is_empty());
    let doc = read_json(&out.join("metrics.json"));
    let aborted = &doc["runs"]["fxtppc"]["aborted"];
    assert!(aborted["t"].as_f64().unwrap() < 10.0);
    assert_eq!(doc["runs"]["fxtppc"]["samples"], log.records.len());
}
