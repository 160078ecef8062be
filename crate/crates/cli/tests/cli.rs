use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn haarsg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haarsg"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SCALAR: &str = "[run]\nmodel = \"scalar-oleinik\"\n[basis]\nlevel = 1\n[grid]\nnx = 64\n";

#[test]
fn run_writes_artifacts_and_mse_reads_them_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR);
    let out = dir.path().join("out");
    let o = haarsg(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["modes.csv", "stats.csv", "manifest.toml"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    let reported: f64 = manifest
        .lines()
        .find_map(|l| l.strip_prefix("mse = ["))
        .unwrap()
        .trim_end_matches(']')
        .parse()
        .unwrap();

    let field = out.join("modes.csv");
    let o = haarsg(&["mse", "--config", &cfg, "--field", field.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let row = stdout.lines().nth(1).unwrap();
    let recomputed: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!(
        (recomputed - reported).abs() <= 1e-14 * reported,
        "{recomputed} vs {reported}"
    );
}

#[test]
fn level_sweep_flag_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR);
    let out = dir.path().join("sweep");
    let o = haarsg(&[
        "run",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--level-sweep",
        "0..2",
        "--threads",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(out.join("J2/modes.csv").exists());
}

#[test]
fn zero_final_time_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SCALAR.replace("[basis]", "t_final = 0\n[basis]"));
    let out = dir.path().join("o");
    let o = haarsg(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("modes.csv").exists());
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SCALAR}[gird]\nnx = 10\n"));
    let o = haarsg(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gird.nx"));

    let cfg = write_config(dir.path(), &SCALAR.replace("[basis]", "cfl = 1.5\n[basis]"));
    assert_eq!(haarsg(&["run", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(
        haarsg(&["run", "--config", &cfg, "--level-sweep", "x"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn io_errors_exit_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        haarsg(&["run", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );

    let cfg = write_config(dir.path(), SCALAR);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let o = haarsg(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn basis_and_project_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let o = haarsg(&[
        "basis",
        "--kind",
        "dct",
        "--param",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read_to_string(out.join("matrix.csv"))
            .unwrap()
            .lines()
            .count(),
        17
    );
    assert_eq!(
        fs::read_to_string(out.join("triple.csv"))
            .unwrap()
            .lines()
            .count(),
        65
    );

    let cfg = write_config(dir.path(), SCALAR);
    let out = dir.path().join("p");
    let o = haarsg(&[
        "project",
        "--config",
        &cfg,
        "--function",
        "sign",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let modes = fs::read_to_string(out.join("modes.csv")).unwrap();
    let v: Vec<f64> = modes
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // Haar level 1: sign(xi - 1/2) is the first wavelet
    assert!(v[0].abs() < 1e-14 && (v[1].abs() - 1.0).abs() < 1e-14 && v[2].abs() < 1e-14);
    let o = haarsg(&["project", "--config", &cfg, "--function", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reference_dump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SCALAR}[reference]\nxi_level = 2\n"));
    let out = dir.path().join("r");
    let o = haarsg(&["reference", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("reference.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x,xi,component,value");
    assert_eq!(csv.lines().count(), 1 + 64 * 4);
}
