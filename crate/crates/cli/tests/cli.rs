use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn blockade(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockade"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value of `key=...` in the one-line steady summary.
fn field(line: &str, key: &str) -> String {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
        .to_string()
}

#[test]
fn steady_shows_blockade_for_antisymmetric_placement() {
    let dir = tempfile::tempdir().unwrap();
    let o = blockade(&["steady", "--gamma", "0.01", "--g0", "1", "--eta", "0.05", "--phi-z", "pi", "--n-max", "4"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    let xi: f64 = field(&line, "xi").parse().unwrap();
    assert!(xi < 1.0 && xi > 0.0, "{line}");
    let c: f64 = field(&line, "concurrence").parse().unwrap();
    assert!((c - 0.4638).abs() < 1e-3);
}

#[test]
fn steady_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let o = blockade(&["steady", "--eta", "0", "--n-max", "3"], dir.path());
    assert!(o.status.success());
    let line = stdout(&o);
    assert_eq!(field(&line, "p_ee").parse::<f64>().unwrap(), 0.0);
    assert_eq!(field(&line, "xi"), "undefined");

    let o = blockade(&["steady", "--g0", "0", "--eta", "0.05", "--gamma", "0.01", "--n-max", "2"], dir.path());
    let xi: f64 = field(&stdout(&o), "xi").parse().unwrap();
    assert!((xi - 1.0).abs() < 1e-6);
}

#[test]
fn steady_writes_record_and_density_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = blockade(&["steady", "--g0", "1", "--eta", "0.05", "--gamma", "0.01", "--n-max", "2", "--output", "r.csv", "--rho", "rho.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let record = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(record.contains("# g0 = 1"));
    let rho = fs::read_to_string(dir.path().join("rho.csv")).unwrap();
    assert!(rho.lines().any(|l| l == "row,col,re,im"));
}

#[test]
fn config_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.toml"), "g0 = 1.0\neta = 0.05\ngamma = 0.01\nn_max = 3\nphi_z = 3.141592653589793\n").unwrap();
    let from_file = blockade(&["steady", "--config", "m.toml"], dir.path());
    let from_flags = blockade(&["steady", "--g0", "1", "--eta", "0.05", "--gamma", "0.01", "--n-max", "3", "--phi-z", "pi"], dir.path());
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(stdout(&from_file), stdout(&from_flags));

    let overridden = blockade(&["steady", "--config", "m.toml", "--g0", "0"], dir.path());
    let xi: f64 = field(&stdout(&overridden), "xi").parse().unwrap();
    assert!((xi - 1.0).abs() < 1e-6);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "g0 = 1.0\ngama = 0.1\n").unwrap();
    let o = blockade(&["steady", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gama"));

    let o = blockade(&["figure", "fig9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig2-inset") && stderr(&o).contains("fig5b"));

    let o = blockade(&["steady", "--gamma", "-1"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = blockade(&["sweep", "--axis1", "g1=0:1:3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = blockade(&["steady", "--gamma", "0", "--g0", "0", "--eta", "0", "--n-max", "1"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn converge_reports_a_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let o = blockade(&["converge", "--g0", "1", "--eta", "0.05", "--gamma", "0.01", "--n-max", "2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("converged n_max = 4"), "{}", stdout(&o));
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = blockade(
        &["sweep", "--g0", "1", "--gamma", "0.1", "--eta", "0.5", "--n-max", "2", "--axis1", "g0=0.5:1.5:3", "--axis2", "phi_z_over_pi=0,1", "--sentinels", "2", "--output", "s.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(data[0].starts_with("g0,phi_z_over_pi,p_ee"));
    assert_eq!(data.len(), 1 + 6);
    assert!(text.contains("# sentinel"));
}

#[test]
fn figure_fig5b_reaches_strong_entanglement() {
    let dir = tempfile::tempdir().unwrap();
    let o = blockade(&["figure", "fig5b", "--out-dir", "."], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("fig5b.csv")).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    let col = header.split(',').position(|h| h == "concurrence").unwrap();
    let peak = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .filter_map(|l| l.split(',').nth(col)?.parse::<f64>().ok())
        .fold(0.0, f64::max);
    assert!((peak - 0.93).abs() < 0.02, "peak {peak}");
    assert!(dir.path().join("fig5b_snapshot.csv").exists());
}
