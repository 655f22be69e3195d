use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn jcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcm"))
        .args(args)
        .output()
        .expect("failed to launch jcm")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"
[model]
k = 1
gamma = 1.0
mu = 0.1

[field]
kind = "coherent"
nbar = 1.0

[time]
t_end = 5.0
samples = 11
"#;

#[test]
fn list_presets_prints_one_name_per_line() {
    let out = jcm(&["list-presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "coherent_bare_identity"));
    assert!(text.lines().count() > 40);
}

#[test]
fn simulate_config_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = jcm(&["simulate", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert!(lines[0].starts_with("t,W,rho_ee"));
    assert!(lines[1].starts_with("0.0,1.0,"));
}

#[test]
fn preset_with_config_overrides_to_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[time]\nt_end = 2.0\nsamples = 5\n");
    let target = dir.path().join("run.json");
    let out = jcm(&[
        "simulate",
        "--preset",
        "thermal_kerr_sqrt_n_lown",
        "--config",
        &cfg,
        "--format",
        "json",
        "--output",
        target.to_str().unwrap(),
        "--oracle",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = jcm_core::scenario::read_json(fs::File::open(&target).unwrap()).unwrap();
    assert_eq!(doc.records.len(), 5);
    assert_eq!(doc.metadata.config.model.chi, 0.03);
    assert!(doc.metadata.diagnostics.oracle_max_deviation.unwrap() < 1e-8);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("gamma = 1.0", "gamma = -1.0"));
    assert_eq!(jcm(&["simulate", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(
        jcm(&["simulate", "--preset", "no_such_preset"])
            .status
            .code(),
        Some(2)
    );
    let cfg = write_config(dir.path(), "[model]\nk = 1\nunknown = 3\n");
    assert_eq!(jcm(&["simulate", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(jcm(&["simulate"]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        jcm(&["simulate", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );
    let cfg = write_config(dir.path(), SMALL);
    let bad_out = dir.path().join("nope").join("out.csv");
    let out = jcm(&[
        "simulate",
        "--config",
        &cfg,
        "--output",
        bad_out.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(
        jcm(&["revivals", "--input", missing.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn revivals_from_emitted_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("w.csv");
    let out = jcm(&[
        "simulate",
        "--preset",
        "coherent_bare_identity",
        "--output",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = jcm(&["revivals", "--input", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "{text}");
    let t: f64 = rows[0].split(',').next().unwrap().parse().unwrap();
    assert!(t > 50.0 && t <= 60.0);
}
