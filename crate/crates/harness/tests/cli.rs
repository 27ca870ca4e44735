use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stabcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabcert")).args(args).output().unwrap()
}

fn write_matrix(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const DIAG: &str = "4 4\n10 0 0 0\n0 6 0 0\n0 0 1 0\n0 0 0 -4\n";

#[test]
fn certify_small_noise() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_matrix(dir.path(), "a.txt", DIAG);
    let out = stabcert(&[
        "certify", "--matrix", &m, "--noise", "gaussian:1e-6", "--region", "(3,8)", "--K", "fixed:500", "--seed", "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["certificate"]["certified"], true);
    assert_eq!(v["outcome"], "certified");
}

#[test]
fn certify_reads_noise_file_and_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_matrix(dir.path(), "a.txt", DIAG);
    let e = write_matrix(dir.path(), "e.txt", "4 4\n0 1e-7 0 0\n1e-7 0 0 0\n0 0 0 0\n0 0 0 0\n");
    let out = stabcert(&[
        "certify", "--matrix", &m, "--noise", &e, "--theorem", "least_singular", "--K", "fixed:500", "--format", "text",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("certificate.certified = true"), "{text}");
}

#[test]
fn project_bound_and_compare_emit_rows() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_matrix(dir.path(), "a.txt", DIAG);
    let out = stabcert(&["project-bound", "--matrix", &m, "--noise", "gaussian:1e-5", "--region", "(3,8)", "--K", "grid"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["measured"]["norm"].as_f64().unwrap() <= v["davis_kahan"]["rhs"].as_f64().unwrap());

    let out = stabcert(&["compare", "--matrix", &m, "--noise", "gaussian:1e-5", "--region", "(3,8)", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("tv_floor"));
}

#[test]
fn contour_verify_matches_eigenprojector() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_matrix(dir.path(), "a.txt", DIAG);
    let out = stabcert(&["contour-verify", "--matrix", &m, "--region", "(3,8)", "--noise", "gaussian:1e-4", "--K", "fixed:20"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["error_vs_eigenprojector"].as_f64().unwrap() <= 1e-6);
    assert!(v["diagnostics"]["checks"]["erer_le_h"].as_bool().unwrap());
}

#[test]
fn monte_carlo_writes_csv_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let csv = dir.path().join("trials.csv");
    fs::write(
        &cfg,
        format!(
            r#"
name = "cli"
theorem = "davis_kahan"
trials = 12
seed = 1
k = "fixed:10"
region = "(0.5,inf)"

[ground_truth]
kind = "low_rank_psd"
n = 10
rank = 2
lo = 2.0
hi = 5.0
seed = 2

[noise]
dist = "gaussian"
scale = 0.01
seed = 3

[output]
csv = "{}"
"#,
            csv.display()
        ),
    )
    .unwrap();
    let out = stabcert(&["monte-carlo", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("violations      0"));
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 13);
}

#[test]
fn invalid_inputs_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "name = \"bad\"\ntheorem = \"projector_bound\"\ntrials = 0\nseed = 1\n").unwrap();
    assert_eq!(stabcert(&["monte-carlo", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    let m = write_matrix(dir.path(), "a.txt", "2 2\n1 2\n3 4\n");
    assert_eq!(stabcert(&["certify", "--matrix", &m, "--region", "(0,1)"]).status.code(), Some(2));
    assert_eq!(stabcert(&["certify", "--matrix", "/nonexistent", "--region", "(0,1)"]).status.code(), Some(2));
}

#[test]
fn wigner_check_reports_ratios() {
    let out = stabcert(&["wigner-check", "--n", "60", "--trials", "4", "--noise", "rademacher:1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["norm_ratios"].as_array().unwrap().len(), 4);
}
