//! End-to-end runs of the `modesel` binary and its exit-code contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn modesel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modesel"))
        .args(args)
        .env("MODESEL_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn gen_data(dir: &Path) -> PathBuf {
    let data = dir.join("data.csv");
    let out = modesel(&["gen-data", "--n", "200", "--dim", "3", "--seed", "4", "-o", data.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    data
}

fn write_config(dir: &Path, name: &str, method: &str, extra: &str) -> PathBuf {
    let path = dir.join(format!("{name}.toml"));
    let text = format!(
        "seed = 3\n[data]\npath = \"data.csv\"\n[run]\nmethod = \"{method}\"\nbudget = 40\n\
         strategy_eval_k = 10\n[probe]\nepochs = 5\nlr = 0.1\n[output]\ndir = \"{name}\"\n{extra}"
    );
    fs::write(&path, text).unwrap();
    path
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn run_writes_artifacts_and_guards_the_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    gen_data(tmp.path());
    let cfg = write_config(tmp.path(), "mode", "mode", "dump_scores = true\n");
    let cfg = cfg.to_str().unwrap();

    let out = modesel(&["run", cfg]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("mode");
    for f in ["selected.csv", "rounds.csv", "weights.csv", "manifest.json", "scores_round_001.csv"] {
        assert!(dir.join(f).exists(), "missing {f}");
    }
    let selected = fs::read_to_string(dir.join("selected.csv")).unwrap();
    assert_eq!(selected.lines().count(), 41);
    assert!(header(&dir.join("weights.csv")).starts_with("round,temp,w_u,w_d,w_c,w_b"));

    assert_eq!(code(&modesel(&["run", cfg])), 4);
    assert_eq!(code(&modesel(&["run", cfg, "--force"])), 0);
    // forced rerun with the same seed reproduces the selection
    assert_eq!(fs::read_to_string(dir.join("selected.csv")).unwrap(), selected);
}

#[test]
fn methods_share_formats_but_not_selections() {
    let tmp = tempfile::tempdir().unwrap();
    gen_data(tmp.path());
    for m in ["mode", "random"] {
        let cfg = write_config(tmp.path(), m, m, "");
        assert_eq!(code(&modesel(&["run", cfg.to_str().unwrap()])), 0);
    }
    let (a, b) = (tmp.path().join("mode"), tmp.path().join("random"));
    for f in ["selected.csv", "rounds.csv", "weights.csv"] {
        assert_eq!(header(&a.join(f)), header(&b.join(f)));
    }
    assert_ne!(
        fs::read_to_string(a.join("selected.csv")).unwrap(),
        fs::read_to_string(b.join("selected.csv")).unwrap()
    );

    let report_dir = tmp.path().join("report");
    let out = modesel(&[
        "report",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--out",
        report_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let md = String::from_utf8(out.stdout).unwrap();
    assert!(md.contains("| mode | 1 |") && md.contains("| random | 1 |"), "{md}");
    assert!(report_dir.join("report.md").exists() && report_dir.join("report.csv").exists());
}

#[test]
fn config_and_data_errors_map_to_distinct_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[data]\npath = \"x.csv\"\n[output]\ndir = \"o\"\n[run]\nbudgte = 3\n").unwrap();
    assert_eq!(code(&modesel(&["run", bad.to_str().unwrap()])), 2);

    let missing = write_config(tmp.path(), "missing", "mode", "");
    assert_eq!(code(&modesel(&["run", missing.to_str().unwrap()])), 3);

    gen_data(tmp.path());
    let huge = tmp.path().join("huge.toml");
    fs::write(&huge, "[data]\npath = \"data.csv\"\n[run]\nbudget = 100000\n[output]\ndir = \"h\"\n").unwrap();
    assert_eq!(code(&modesel(&["run", huge.to_str().unwrap()])), 2);

    assert_eq!(code(&modesel(&["run"])), 2);
    assert_eq!(code(&modesel(&["frobnicate"])), 2);
    assert_eq!(code(&modesel(&["report"])), 2);
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(code(&modesel(&["report", empty.to_str().unwrap()])), 3);
}

#[test]
fn verify_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let curve = tmp.path().join("curve.csv");
    let out = modesel(&["verify", "--trials", "500", "--instances", "10", "--curve", curve.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(header(&curve).starts_with("budget,instances,mean_ratio,min_ratio"));

    let out = modesel(&["verify", "--trials", "500", "--instances", "10", "--inject-supermodular"]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL]"));

    let out = modesel(&["verify", "--trials", "0", "--instances", "5"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn gen_data_refuses_to_overwrite() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("d.bin");
    let p = path.to_str().unwrap();
    assert_eq!(code(&modesel(&["gen-data", "--format", "binary", "-o", p])), 0);
    assert_eq!(code(&modesel(&["gen-data", "--format", "binary", "-o", p])), 4);
    assert_eq!(code(&modesel(&["gen-data", "--format", "binary", "-o", p, "--force"])), 0);
    assert_eq!(code(&modesel(&["gen-data", "--classes", "1", "-o", tmp.path().join("x.csv").to_str().unwrap()])), 2);
}
