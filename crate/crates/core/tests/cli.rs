use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vipcop::data::two_gaussians;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vipcop"));
    c.env_remove("VIPCOP_SEED");
    c
}

fn write_csv(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let t = two_gaussians(n, 5, 0.8, seed).unwrap();
    let mut text = String::from("a,b,c,d,e,target\n");
    for i in 0..t.n_rows() {
        let row: Vec<String> = t.row(i).iter().map(|v| format!("{v:.5}")).collect();
        writeln!(
            text,
            "{},{}",
            row.join(","),
            if t.label(i) == 1 { "yes" } else { "no" }
        )
        .unwrap();
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn write_config(dir: &Path, file: &str, csv: &str, extra: &str) -> PathBuf {
    let path = dir.join(file);
    let text = format!(
        "baselines = [\"h1\", \"o2\"]\n{extra}\n[dataset]\npath = \"{csv}\"\nlabel = \"target\"\n\n[budget]\nmax_samples = 30\nmax_features = 3\n\n[engine]\nrounds = 6\nbatch = 4\n"
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn optimize_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), "blobs.csv", 200, 1);
    let out = dir.path().join("res");
    let o = bin()
        .args(["optimize", "--dataset"])
        .arg(&csv)
        .args([
            "--label",
            "target",
            "--budget-samples",
            "30",
            "--budget-features",
            "3",
        ])
        .args(["--rounds", "8", "--batch", "4", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("vipcop blobs/original"), "{}", stdout(&o));
    let cell = out.join("blobs/original/vipcop");
    let run: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cell.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["config"]["rounds"], 8);
    assert_eq!(run["runs"].as_array().unwrap().len(), 4);
    let row: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cell.join("row.json")).unwrap()).unwrap();
    assert_eq!(row["method"], "vipcop");
    assert!(row["context_size"]["samples"].as_u64().unwrap() <= 30);
    let traj = std::fs::read_to_string(cell.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("run,tau,round,best_so_far,elapsed_seconds\n"));
    assert_eq!(traj.lines().count(), 1 + 4 * 8);
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), "blobs.csv", 120, 2);
    let out = dir.path().join("res");
    let o = bin()
        .env("VIPCOP_SEED", "77")
        .args(["baseline", "--method", "h1", "--label", "target", "--dataset"])
        .arg(&csv)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let row: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("blobs/original/h1/row.json")).unwrap())
            .unwrap();
    assert_eq!(row["seed"], 77);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_csv(dir.path(), "blobs.csv", 60, 3);
    let unknown_method = bin()
        .args(["baseline", "--method", "h9", "--label", "target", "--dataset"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(unknown_method.status.code(), Some(2));
    assert!(stderr(&unknown_method).contains("h9"));

    let no_dataset = bin().args(["optimize"]).output().unwrap();
    assert_eq!(no_dataset.status.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[engine]\nroundz = 3\n").unwrap();
    let typo = bin().args(["optimize", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(typo.status.code(), Some(2));
    assert!(stderr(&typo).contains("roundz"), "{}", stderr(&typo));

    let missing = bin()
        .args(["report", "--results"])
        .arg(dir.path().join("nothing"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn bench_resumes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let configs = dir.path().join("configs");
    std::fs::create_dir(&configs).unwrap();
    write_csv(&configs, "one.csv", 150, 4);
    write_csv(&configs, "two.csv", 150, 5);
    write_config(&configs, "a.toml", "one.csv", "");
    write_config(&configs, "b.toml", "two.csv", "");
    let out = dir.path().join("res");
    let run = |force: bool| {
        let mut c = bin();
        c.args(["bench", "--jobs", "2", "--config"])
            .arg(&configs)
            .arg("--out")
            .arg(&out);
        if force {
            c.arg("--force");
        }
        c.output().unwrap()
    };
    let first = run(false);
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(
        stdout(&first).contains("6 cells, 0 resumed, 0 failed"),
        "{}",
        stdout(&first)
    );
    for f in ["summary.md", "ranks.csv", "stats.json", "cells.json"] {
        assert!(out.join("report").join(f).exists(), "{f}");
    }
    let second = run(false);
    assert!(
        stdout(&second).contains("6 cells, 6 resumed"),
        "{}",
        stdout(&second)
    );
    let forced = run(true);
    assert!(
        stdout(&forced).contains("6 cells, 0 resumed"),
        "{}",
        stdout(&forced)
    );

    let report = bin().args(["report", "--results"]).arg(&out).output().unwrap();
    assert!(report.status.success(), "{}", stderr(&report));
    assert!(
        stdout(&report).contains("6 rows, 2 trajectories"),
        "{}",
        stdout(&report)
    );
    let table = std::fs::read_to_string(out.join("report/trajectories.csv")).unwrap();
    assert!(table.starts_with("dataset,setting,runs,rounds,"));
}

#[test]
fn bench_reports_failed_cells() {
    let dir = tempfile::tempdir().unwrap();
    let configs = dir.path().join("configs");
    std::fs::create_dir(&configs).unwrap();
    write_csv(&configs, "ok.csv", 100, 6);
    write_csv(&configs, "broken.csv", 100, 7);
    write_config(&configs, "a.toml", "ok.csv", "");
    write_config(
        &configs,
        "b.toml",
        "broken.csv",
        "[evaluator]\nkind = \"external_bridge\"\ncommand = \"/nonexistent/evaluator\"\n",
    );
    let out = dir.path().join("res");
    let o = bin()
        .args(["bench", "--config"])
        .arg(&configs)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(
        stderr(&o).contains("failed broken/original/vipcop"),
        "{}",
        stderr(&o)
    );
    assert!(out.join("ok/original/vipcop/row.json").exists());
}

#[test]
fn noise_setting_transforms_training_rows_only() {
    let dir = tempfile::tempdir().unwrap();
    write_csv(dir.path(), "blobs.csv", 200, 8);
    let cfg = write_config(
        dir.path(),
        "noisy.toml",
        "blobs.csv",
        "setting = \"dn_s1\"\n\n[noise]\nkind = \"s1_marginal\"\nseed = 3\n",
    );
    let out = dir.path().join("res");
    let o = bin()
        .args(["optimize", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("blobs/dn_s1/vipcop/row.json").exists());

    let mismatched = write_config(dir.path(), "bad.toml", "blobs.csv", "setting = \"dn_s1\"\n");
    let o = bin()
        .args(["optimize", "--config"])
        .arg(&mismatched)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("noise"), "{}", stderr(&o));
}
