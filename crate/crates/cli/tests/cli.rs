use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modarray")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows with the timestamp column dropped.
fn rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit_once(',').unwrap().0.to_owned())
        .collect()
}

#[test]
fn verify_sparse_reports_depth_12() {
    let o = run(&["verify", "--code", "bb72", "--layout", "sparse"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l == "depth 12"), "{}", stdout(&o));
}

#[test]
fn unknown_layout_names_the_valid_ones() {
    let o = run(&["compile", "--code", "bb72", "--layout", "nosuch"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    for name in ["cyclic", "sparse", "flat", "interleaved-gates", "concurrent-rounds"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn unknown_code_fails() {
    assert!(!run(&["verify", "--code", "bb7"]).status.success());
}

#[test]
fn depth_table_for_bb144() {
    let o = run(&["depth", "--code", "bb144", "--rounds", "10"]);
    let out = stdout(&o);
    assert!(out.contains("bb144, T = 10"));
    let sparse = out.lines().find(|l| l.starts_with("sparse")).unwrap();
    assert!(sparse.contains("120 / 120") && sparse.contains("80 / 80") && sparse.contains("40 / 40"), "{sparse}");
    // The concurrent-rounds gate column is the one known mismatch.
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("concurrent-rounds gates"));
}

#[test]
fn experiment_is_deterministic_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "code = \"bb72\"\nrounds = 1\nshots = 500\nseed = 4\np = [0.01]\n").unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        let o = run(&["experiment", "--config", cfg.to_str().unwrap(), "--shots", "40", "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (ra, rb) = (rows(&a), rows(&b));
    assert_eq!(ra, rb);
    assert_eq!(ra.len(), 1);
    let fields: Vec<&str> = ra[0].split(',').collect();
    assert_eq!(fields[7], "40");
    assert_eq!(fields[6], "1");
}

#[test]
fn malformed_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "shots = \"many\"\n").unwrap();
    let o = run(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("malformed config"));
}

#[test]
fn fit_needs_three_p_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = run(&["experiment", "--rounds", "1", "--shots", "50", "--p", "0.01", "--p", "0.02", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let f = run(&["fit", out.to_str().unwrap()]);
    assert_eq!(f.status.code(), Some(1));
    assert!(stderr(&f).contains("at least 3"));
}

#[test]
fn oracle_suite_passes() {
    let o = run(&["oracle", "--instances", "20", "--seed", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("lists checked"));
}

#[test]
fn help_lists_every_flag() {
    let help = stdout(&run(&["experiment", "--help"]));
    for flag in [
        "--code", "--layout", "--basis", "--p", "--tau-s", "--tau-m", "--rounds", "--shots", "--seed", "--out", "--config",
    ] {
        assert!(help.contains(flag), "{flag} missing from:\n{help}");
    }
}

#[test]
fn catalog_lists_codes() {
    let out = stdout(&run(&["catalog"]));
    for name in ["bb72", "bb90", "bb108", "bb144"] {
        assert!(out.contains(name));
    }
}
