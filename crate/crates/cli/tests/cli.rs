use std::path::Path;
use std::process::{Command, Output};

const GOLDEN: &str = "seed = 3\n\n[subspace]\nn = 2\nd = 1\nrows = [[\"0\"], [\"phi\"]]\n";

fn dioph(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dioph")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn golden_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("golden.toml"), GOLDEN).unwrap();
    dir
}

#[test]
fn dim_bound_at_tau_one_is_d() {
    let dir = tempfile::tempdir().unwrap();
    let out = dioph(dir.path(), &["dim-bound", "--n", "4", "--d", "3", "--tau", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "3");
}

#[test]
fn bad_rational_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[subspace]\nn = 2\nd = 1\nrows = [[\"0\"],\n  [\"1/0\"]]\n").unwrap();
    let out = dioph(dir.path(), &["exponent", "--config", "bad.toml", "--hmax", "10"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bad.toml:5:4:"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&dioph(dir.path(), &["frobnicate"])), 2);
    assert_eq!(code(&dioph(dir.path(), &["dim-bound", "--n", "2"])), 2);
    assert_eq!(code(&dioph(dir.path(), &["--help"])), 0);
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dioph(dir.path(), &["exponent", "--config", "absent.toml", "--hmax", "10"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn budget_overrun_exits_three() {
    let dir = golden_dir();
    let out = dioph(dir.path(), &["--budget", "100", "exponent", "--config", "golden.toml", "--hmax", "10000"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let out = Command::new(env!("CARGO_BIN_EXE_dioph"))
        .current_dir(dir.path())
        .env("DIOPH_BUDGET", "100")
        .args(["exponent", "--config", "golden.toml", "--hmax", "10000"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
}

#[test]
fn dry_run_validates_without_writing() {
    let dir = golden_dir();
    let out = dioph(dir.path(), &["--dry-run", "exponent", "--config", "golden.toml", "--hmax", "100"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("budget:"));
    assert!(!dir.path().join("records.csv").exists());
}

#[test]
fn exponent_writes_records_and_plot_data() {
    let dir = golden_dir();
    let out = dioph(dir.path(), &["exponent", "--config", "golden.toml", "--hmax", "100", "--plot", "records.dat"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert!(csv.contains("# seed: 3"));
    let plot = std::fs::read_to_string(dir.path().join("records.dat")).unwrap();
    let mut lines = plot.lines();
    assert_eq!(lines.next(), Some("# height dist vhat"));
    let heights: Vec<&str> = lines.map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(heights, ["1", "2", "3", "5", "8", "13", "21", "34", "55", "89"]);
}

#[test]
fn json_output_carries_meta_and_table() {
    let dir = golden_dir();
    let out = dioph(dir.path(), &["records", "--config", "golden.toml", "--hmax", "50", "--out", "r.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["meta"]["command"], "records");
    assert_eq!(v["table"].as_array().unwrap().len(), 8);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = golden_dir();
    let out = dioph(dir.path(), &["--seed", "42", "exponent", "--config", "golden.toml", "--hmax", "20"]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert!(csv.contains("# seed: 42"));
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dioph(dir.path(), &["verify"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
