use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn biharm(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_biharm"));
    cmd.args(args).env_remove("BIHARM_OUT_DIR");
    if let Some(dir) = out_dir {
        cmd.env("BIHARM_OUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV body, skipping the metadata line and header.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn residual_writes_into_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = biharm(
        &[
            "residual", "--case", "C1B", "--rmin", "0.01", "--rmax", "10", "--nodes", "500",
        ],
        Some(dir.path()),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("residual.csv")).unwrap();
    let data = rows(&csv);
    assert_eq!(data.len(), 500);
    assert!(data.iter().all(|row| row[3].abs() < 1e-8));
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let args = ["hamiltonian", "--case", "C1B", "--nodes", "64"];
    let (a, b) = (biharm(&args, None), biharm(&args, None));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn metadata_line_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = biharm(
        &[
            "residual", "--case", "C2B", "--c", "0.7", "--nodes", "40", "--out", "a.csv",
        ],
        Some(dir.path()),
    );
    assert_eq!(first.status.code(), Some(0));
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let again = biharm(
        &[
            "residual",
            "--config",
            a.to_str().unwrap(),
            "--out",
            b.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(
        again.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&again.stderr)
    );
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn config_from_another_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    assert_eq!(
        biharm(&["catalog", "--out", path.to_str().unwrap()], None)
            .status
            .code(),
        Some(0)
    );
    let o = biharm(&["residual", "--config", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_prints_the_outcome() {
    let o = biharm(&["classify", "--from", "euclidean", "--to", "sphere"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ProperBiharmonicFamily C1B\n");
}

#[test]
fn validation_errors_exit_with_two() {
    assert_eq!(biharm(&["residual", "--no-such-flag"], None).status.code(), Some(2));
    assert_eq!(biharm(&["residual", "--case", "C9Z"], None).status.code(), Some(2));
    assert_eq!(
        biharm(&["residual", "--case", "C1B", "--nodes", "1"], None)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn numerical_failures_exit_with_three() {
    let o = biharm(
        &["conformal", "--to", "hyperbolic", "--slope", "100", "--rmax", "5"],
        None,
    );
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
}

#[test]
fn stability_certifies_the_sphere_case() {
    let o = biharm(&["stability", "--case", "sphere", "--nodes", "256"], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let row = out.lines().last().unwrap();
    assert!(row.ends_with(",Stable"), "{out}");
}

#[test]
fn catalog_lists_every_case() {
    let o = biharm(&["catalog"], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for id in ["C1A", "C1B", "C1C", "C2B", "C3C", "NX3B"] {
        assert!(out.contains(id), "{id} missing");
    }
}
