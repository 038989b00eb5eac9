use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use super::config::{ExperimentConfig, Setting};
use crate::baselines::{self, BaselineKind, BaselineSpec, ContextSize, Inputs, Report};
use crate::data::{augment, inject_noise, load_csv, split, Table};
use crate::engine::{self, write_run_json, write_trajectory_csv};
use crate::error::{Error, EvalError, Result};
use crate::evaluator::{balanced_accuracy, ContextSelection, Evaluator, Metric};
use crate::rng;
use crate::stats::{self, ScoreMatrix, DEFAULT_PERMUTATIONS};

/// Method id of the engine in result rows.
pub const ENGINE_METHOD: &str = "vipcop";

/// Splits of one dataset, with the setting's transform applied to `train`.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: String,
    pub setting: Setting,
    pub train: Table,
    pub val: Table,
    pub test: Table,
}

/// Loads, splits, and transforms the training split only.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let ds = cfg.dataset.as_ref().expect("validated");
    let table = load_csv(&ds.path, &ds.label)?;
    let (train, val, test) = split(&table, &cfg.split)?;
    let train = match cfg.setting {
        Setting::Original => train,
        Setting::DaSample | Setting::DaFeature => augment(&train, cfg.augment.as_ref().expect("validated"))?,
        _ => inject_noise(&train, cfg.noise.as_ref().expect("validated"))?,
    };
    Ok(Prepared {
        dataset: ds.display_name(),
        setting: cfg.setting,
        train,
        val,
        test,
    })
}

/// `<out>/<dataset>/<setting>/<method>`.
pub fn cell_dir(out: &Path, dataset: &str, setting: Setting, method: &str) -> PathBuf {
    out.join(dataset).join(setting.name()).join(method)
}

fn write_row(dir: &Path, report: &Report) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("row.json");
    std::fs::write(&path, serde_json::to_string_pretty(report)? + "\n").map_err(|e| Error::io(&path, e))
}

fn read_row(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::config(path.display().to_string(), format!("corrupt row: {e}")))
}

/// Test balanced accuracy of a context. Evaluators without predictions
/// (the additive oracle) fall back to their subset score on the test split.
fn context_test_score(
    p: &Prepared,
    evaluator: &dyn Evaluator,
    ctx: &ContextSelection,
    seed: u64,
) -> Result<f64> {
    match evaluator.score_context(&p.train, ctx, &p.test) {
        Ok(pred) => Ok(balanced_accuracy(&pred, p.test.labels())?),
        Err(EvalError::Unsupported(_)) => Ok(evaluator.score_subset(
            &p.train,
            ctx,
            &p.test,
            Metric::BalancedAccuracy,
            rng::stream_key(seed, &[0x7E57]),
        )?),
        Err(e) => Err(e.into()),
    }
}

/// Runs the engine on a prepared dataset and writes `run.json`,
/// `trajectory.csv` and `row.json`.
pub fn optimize_prepared(cfg: &ExperimentConfig, p: &Prepared) -> Result<Report> {
    let start = Instant::now();
    let engine_cfg = cfg.engine_config();
    let evaluator = cfg.evaluator.build(&p.train, &cfg.budget)?;
    let outcome = engine::optimize(&p.train, &p.val, evaluator.as_ref(), &cfg.budget, &engine_cfg)?;
    let score = context_test_score(p, evaluator.as_ref(), &outcome.selection, cfg.seed)?;
    let best = outcome.best_run();
    let mut report = Report {
        dataset: p.dataset.clone(),
        method: ENGINE_METHOD.into(),
        setting: p.setting.name().into(),
        score,
        per_run_scores: None,
        context_size: ContextSize::from(&outcome.selection),
        wall_time: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
        details: json!({
            "evaluator": evaluator.name(),
            "best_run": best.run,
            "tau": best.tau,
            "estimated_val": best.estimated_val,
            "estimated_val_includes_intercept": engine_cfg.intercept,
            "runs": outcome.runs.len(),
            "failed_runs": outcome.failures.len(),
            "evaluator_calls": outcome.runs.iter().map(|r| r.evaluator_calls).sum::<usize>(),
            "samples": outcome.selection.samples(),
            "features": outcome.selection.features(),
        }),
    };
    let dir = cell_dir(&cfg.out, &p.dataset, p.setting, ENGINE_METHOD);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_run_json(dir.join("run.json"), &engine_cfg, &outcome)?;
    write_trajectory_csv(dir.join("trajectory.csv"), &outcome)?;
    report.wall_time = start.elapsed().as_secs_f64();
    write_row(&dir, &report)?;
    Ok(report)
}

pub fn cmd_optimize(cfg: &ExperimentConfig) -> Result<Report> {
    optimize_prepared(cfg, &prepare(cfg)?)
}

/// Runs one baseline on a prepared dataset and writes its `row.json`.
pub fn baseline_prepared(cfg: &ExperimentConfig, p: &Prepared, method: &str) -> Result<Report> {
    let kind = BaselineKind::from_id(method)
        .ok_or_else(|| Error::config("method", format!("unknown method '{method}'")))?;
    let evaluator = cfg.evaluator.build(&p.train, &cfg.budget)?;
    let inputs = Inputs {
        train: &p.train,
        val: &p.val,
        test: &p.test,
        evaluator: evaluator.as_ref(),
        budget: &cfg.budget,
    };
    let mut report = baselines::run_baseline(&BaselineSpec::new(kind, cfg.seed), inputs)?;
    report.dataset = p.dataset.clone();
    report.setting = p.setting.name().into();
    write_row(&cell_dir(&cfg.out, &p.dataset, p.setting, method), &report)?;
    Ok(report)
}

/// Method ids named by `method`: one id, or every configured baseline for
/// `all`.
pub fn resolve_methods(cfg: &ExperimentConfig, method: &str) -> Result<Vec<String>> {
    if method == "all" {
        return Ok(cfg.baselines.clone());
    }
    if BaselineKind::from_id(method).is_none() {
        return Err(Error::config(
            "method",
            format!("unknown method '{method}' (expected h1, h2, h3, o1, o2 or all)"),
        ));
    }
    Ok(vec![method.to_string()])
}

pub fn cmd_baseline(cfg: &ExperimentConfig, method: &str) -> Result<Vec<Report>> {
    let methods = resolve_methods(cfg, method)?;
    let p = prepare(cfg)?;
    methods.iter().map(|m| baseline_prepared(cfg, &p, m)).collect()
}

/// One cell of a benchmark sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CellOutcome {
    pub dataset: String,
    pub setting: String,
    pub method: String,
    pub resumed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub reports: Vec<Report>,
    pub cells: Vec<CellOutcome>,
    pub report_dir: PathBuf,
}

impl BenchOutcome {
    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }
}

/// Every `*.toml` in `dir`, sorted by name.
pub fn config_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::config(
            "config_dir",
            format!("no .toml configs in {}", dir.display()),
        ));
    }
    Ok(files)
}

/// Engine plus every configured baseline for each config, up to `jobs`
/// cells at a time. Existing rows are reused unless `force` is set. Writes
/// the statistics bundle to `<out>/report`.
pub fn cmd_bench(configs: &[ExperimentConfig], out: &Path, jobs: usize, force: bool) -> Result<BenchOutcome> {
    let mut configs = configs.to_vec();
    for c in &mut configs {
        c.out = out.to_path_buf();
        c.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;
    let results: Vec<(CellOutcome, Option<Report>)> = pool.install(|| {
        configs
            .par_iter()
            .flat_map_iter(|cfg| {
                let methods: Vec<String> = std::iter::once(ENGINE_METHOD.to_string())
                    .chain(cfg.baselines.iter().cloned())
                    .collect();
                let name = cfg.dataset.as_ref().expect("validated").display_name();
                let pending: Vec<&String> = methods
                    .iter()
                    .filter(|m| force || !cell_dir(out, &name, cfg.setting, m).join("row.json").exists())
                    .collect();
                let prepared = if pending.is_empty() {
                    None
                } else {
                    Some(prepare(cfg))
                };
                methods
                    .iter()
                    .map(|m| {
                        let row = cell_dir(out, &name, cfg.setting, m).join("row.json");
                        let mut cell = CellOutcome {
                            dataset: name.clone(),
                            setting: cfg.setting.name().into(),
                            method: m.clone(),
                            resumed: false,
                            error: None,
                        };
                        let result = if !pending.contains(&m) {
                            cell.resumed = true;
                            read_row(&row)
                        } else {
                            match prepared.as_ref().expect("prepared when pending") {
                                Err(e) => Err(Error::Degenerate(e.to_string())),
                                Ok(p) if m == ENGINE_METHOD => optimize_prepared(cfg, p),
                                Ok(p) => baseline_prepared(cfg, p, m),
                            }
                        };
                        match result {
                            Ok(r) => (cell, Some(r)),
                            Err(e) => {
                                cell.error = Some(e.to_string());
                                (cell, None)
                            }
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    });
    let (cells, reports): (Vec<CellOutcome>, Vec<Option<Report>>) = results.into_iter().unzip();
    let reports: Vec<Report> = reports.into_iter().flatten().collect();
    let report_dir = out.join("report");
    write_stats(&reports, &report_dir, configs.first().map_or(42, |c| c.seed))?;
    let cells_path = report_dir.join("cells.json");
    std::fs::write(&cells_path, serde_json::to_string_pretty(&cells)? + "\n")
        .map_err(|e| Error::io(&cells_path, e))?;
    Ok(BenchOutcome {
        reports,
        cells,
        report_dir,
    })
}

fn write_stats(reports: &[Report], dir: &Path, seed: u64) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let methods: std::collections::BTreeSet<&str> = reports.iter().map(|r| r.method.as_str()).collect();
    if methods.len() < 2 {
        let p = dir.join("summary.md");
        let text = format!(
            "# Benchmark summary\n\n{} rows over {} method(s); rankings need at least two methods.\n",
            reports.len(),
            methods.len()
        );
        return std::fs::write(&p, text).map_err(|e| Error::io(&p, e));
    }
    let (matrix, incomplete) = ScoreMatrix::from_reports(reports)?;
    let summary = stats::summarize(
        &matrix,
        Some(ENGINE_METHOD),
        DEFAULT_PERMUTATIONS,
        seed,
        incomplete,
    )?;
    summary.write_bundle(&matrix, dir)
}

/// One row of the time/performance table built from trajectories.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TrajectorySummary {
    pub dataset: String,
    pub setting: String,
    pub runs: usize,
    pub rounds: usize,
    /// Largest best-so-far estimate over all runs.
    pub best_estimate: f64,
    /// Longest run's elapsed time.
    pub elapsed_seconds: f64,
    pub seconds_per_round: f64,
}

fn summarize_trajectory(path: &Path, dataset: &str, setting: &str) -> Result<TrajectorySummary> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::config(path.display().to_string(), format!("{other:?}")),
    })?;
    let mut runs = std::collections::BTreeSet::new();
    let mut rounds = 0;
    let mut best = f64::NEG_INFINITY;
    let mut elapsed: f64 = 0.0;
    for rec in reader.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::config(path.display().to_string(), "corrupt trajectory row"))
        };
        runs.insert(field(0)? as u64);
        rounds = rounds.max(field(2)? as usize + 1);
        best = best.max(field(3)?);
        elapsed = elapsed.max(field(4)?);
    }
    Ok(TrajectorySummary {
        dataset: dataset.into(),
        setting: setting.into(),
        runs: runs.len(),
        rounds,
        best_estimate: best,
        elapsed_seconds: elapsed,
        seconds_per_round: if rounds > 0 { elapsed / rounds as f64 } else { 0.0 },
    })
}

fn subdirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ReportOutcome {
    pub reports: Vec<Report>,
    pub trajectories: Vec<TrajectorySummary>,
    pub report_dir: PathBuf,
}

/// Rebuilds the statistics bundle and the trajectory table from the rows
/// already under `results`.
pub fn cmd_report(results: &Path) -> Result<ReportOutcome> {
    if !results.is_dir() {
        return Err(Error::config(
            "results",
            format!("no results: {} is not a directory", results.display()),
        ));
    }
    let mut reports = Vec::new();
    let mut trajectories = Vec::new();
    for ds in subdirs(results)? {
        if ds.file_name().is_some_and(|n| n == "report") {
            continue;
        }
        for setting in subdirs(&ds)? {
            for method in subdirs(&setting)? {
                let row = method.join("row.json");
                if row.exists() {
                    reports.push(read_row(&row)?);
                }
                let traj = method.join("trajectory.csv");
                if traj.exists() {
                    let name = |p: &Path| {
                        p.file_name()
                            .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
                    };
                    trajectories.push(summarize_trajectory(&traj, &name(&ds), &name(&setting))?);
                }
            }
        }
    }
    if reports.is_empty() {
        return Err(Error::config(
            "results",
            format!("no results under {}", results.display()),
        ));
    }
    let report_dir = results.join("report");
    write_stats(&reports, &report_dir, reports[0].seed)?;
    if !trajectories.is_empty() {
        let path = report_dir.join("trajectories.csv");
        let mut w = csv::Writer::from_path(&path)?;
        for t in &trajectories {
            w.serialize(t)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(ReportOutcome {
        reports,
        trajectories,
        report_dir,
    })
}
