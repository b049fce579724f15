use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bcs_tc::model::Config;
use bcs_tc::pipeline::SWEEP_COLUMNS;
use bcs_tc::report::{ErrorRecord, ManifestRecord, OUT_DIR_ENV};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bcs-tc"));
    c.env_remove(OUT_DIR_ENV);
    c
}

fn write_config(dir: &Path, config: &Config) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

fn small() -> Config {
    let mut c = Config::example();
    c.numerics.n_r = 96;
    c.numerics.n_p = 160;
    c
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

/// The single digest-named directory under `out`.
fn result_dir(out: &Path) -> PathBuf {
    let mut dirs: Vec<_> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.pop().unwrap()
}

#[test]
fn shift_writes_json_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small());
    let out = tmp.path().join("out");
    let o = run(&["shift"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = result_dir(&out);
    let manifest: ManifestRecord =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert!(dir.file_name().unwrap().to_str().unwrap().len() == 16);
    assert!(manifest
        .manifest
        .config_digest
        .starts_with(dir.file_name().unwrap().to_str().unwrap()));
    assert!(manifest.finished_at >= manifest.started_at);
    assert!(dir.join("result.json").exists());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("D_c = "), "{stdout}");
}

#[test]
fn rerun_gives_identical_result_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["gl"], &cfg, &a).status.success());
    assert!(run(&["gl"], &cfg, &b).status.success());
    let ra = std::fs::read(result_dir(&a).join("result.json")).unwrap();
    let rb = std::fs::read(result_dir(&b).join("result.json")).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn csv_format_writes_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small());
    let out = tmp.path().join("out");
    let o = run(&["shift", "--format", "csv"], &cfg, &out);
    assert!(o.status.success());
    let dir = result_dir(&out);
    let gl = std::fs::read_to_string(dir.join("gl.csv")).unwrap();
    assert!(gl.starts_with("beta_c,T_c,lambda0,lambda1,lambda2,D_c\n"));
    let shift = std::fs::read_to_string(dir.join("tc_shift.csv")).unwrap();
    assert!(shift.starts_with("h,T_c_shifted\n"));
    assert_eq!(shift.lines().count(), 1 + small().model.h_values.len());
    assert!(!dir.join("checks.csv").exists());
}

#[test]
fn malformed_config_exits_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    std::fs::write(&path, r#"{"V": {"family": "gaussian"}}"#).unwrap();
    let out = tmp.path().join("out");
    let o = run(&["tc"], &path, &out);
    assert_eq!(o.status.code(), Some(2));
    let rec: ErrorRecord =
        serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(rec.kind, "ConfigError");
    assert_eq!(rec.exit_code, 2);
}

#[test]
fn weak_pairing_fails_assumptions() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small();
    c.model.v.amplitude = 0.05;
    let cfg = write_config(tmp.path(), &c);
    let out = tmp.path().join("out");
    let o = run(&["validate"], &cfg, &out);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAILED"));

    let o = run(&["tc"], &cfg, &out);
    assert_eq!(o.status.code(), Some(3));
    let rec: ErrorRecord = serde_json::from_str(
        &std::fs::read_to_string(result_dir(&out).join("error.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(rec.kind, "AssumptionViolation");
}

#[test]
fn h_sweep_follows_square_law() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small());
    let out = tmp.path().join("out");
    let o = bin()
        .args([
            "sweep",
            "--sweep-axis",
            "h",
            "--sweep-values",
            "0.01,0.02,0.04",
            "--threads",
            "2",
        ])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(result_dir(&out).join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_COLUMNS.join(","));
    let shifts: Vec<f64> = lines
        .map(|l| l.split(',').nth(10).unwrap().parse().unwrap())
        .collect();
    assert_eq!(shifts.len(), 3);
    assert!(shifts[0] != 0.0);
    assert!((shifts[1] / shifts[0] - 4.0).abs() < 1e-9);
    assert!((shifts[2] / shifts[0] - 16.0).abs() < 1e-9);
}

#[test]
fn environment_sets_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small());
    let root = tmp.path().join("from-env");
    let o = bin()
        .args(["validate", "--config"])
        .arg(&cfg)
        .env(OUT_DIR_ENV, &root)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(result_dir(&root).join("result.json").exists());
}
