use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dod-cutcell"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn export_writes_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["export", "--n", "8", "--out", path(dir.path())]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let vtk = fs::read_to_string(dir.path().join("mesh.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version"));
    assert!(vtk.contains("CELL_TYPES"));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("cells="));
}

#[test]
fn zero_time_run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "run",
        "--n",
        "16",
        "--t-final",
        "0",
        "--out",
        path(dir.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["solution.vtk", "diagnostics.csv", "summary.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let diag = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().next(), Some("step,t,l2_norm,min,max"));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "16");
    assert_eq!(row[3], "0");
}

#[test]
fn invalid_angle_exits_with_one() {
    let out = run(&["run", "--gamma", "95"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn conflicting_cfl_flags_are_rejected() {
    let out = run(&["run", "--cfl-epsilon", "0.1", "--cfl-kappa", "0.2"]);
    assert!(!out.status.success());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# test\nrun.n = 8\nproblem.t_final = 0.0\nproblem.gamma_deg = 30\n",
    )
    .unwrap();
    let out = run(&[
        "run",
        "--config",
        path(&cfg),
        "--n",
        "12",
        "--out",
        path(dir.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("12,"));
}

#[test]
fn converge_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run(&[
            "converge",
            "--n-list",
            "8,16",
            "--t-final",
            "0.1",
            "--out",
            path(d.path()),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for f in ["convergence.csv", "l2_error.dat", "beta_error.dat"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let csv = fs::read_to_string(a.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
}
