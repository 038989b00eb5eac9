use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vipcop::data::LabelColumn;
use vipcop::evaluator::Metric;
use vipcop::experiment::{self, ExperimentConfig, Overrides, Setting};
use vipcop::Result;

#[derive(Parser)]
#[command(
    name = "vipcop",
    version,
    about = "Context optimization for tabular in-context learners"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a context for one dataset and score it on the test split.
    Optimize(Common),
    /// Run one baseline, or all of them.
    Baseline {
        #[command(flatten)]
        common: Common,
        /// h1, h2, h3, o1, o2 or all.
        #[arg(long, default_value = "all")]
        method: String,
    },
    /// Run the engine and every baseline over a directory of configs.
    Bench {
        /// Directory of `*.toml` experiment configs.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Recompute cells that already have results.
        #[arg(long)]
        force: bool,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Rebuild rankings and the trajectory table from existing results.
    Report {
        #[arg(long, default_value = "results")]
        results: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV file; replaces the config's dataset.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Label column name or zero-based index.
    #[arg(long)]
    label: Option<LabelColumn>,
    #[arg(long)]
    setting: Option<Setting>,
    #[arg(long)]
    budget_samples: Option<usize>,
    #[arg(long)]
    budget_features: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    metric: Option<Metric>,
    /// knn, oracle or bridge.
    #[arg(long)]
    evaluator: Option<String>,
    /// Command line of an external evaluator process.
    #[arg(long)]
    bridge_cmd: Option<String>,
    #[arg(long, env = "VIPCOP_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&Overrides {
            dataset: self.dataset.clone(),
            label: self.label.clone(),
            setting: self.setting,
            budget_samples: self.budget_samples,
            budget_features: self.budget_features,
            rounds: self.rounds,
            eta: self.eta,
            batch: self.batch,
            lr: self.lr,
            metric: self.metric,
            evaluator: self.evaluator.clone(),
            bridge_cmd: self.bridge_cmd.clone(),
            seed: self.seed,
            out: self.out.clone(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn row_line(r: &vipcop::baselines::Report, out: &Path) -> String {
    format!(
        "{} {}/{}: test bacc {:.4} context {}x{} in {:.1}s ({})",
        r.method,
        r.dataset,
        r.setting,
        r.score,
        r.context_size.samples,
        r.context_size.features,
        r.wall_time,
        experiment::cell_dir(out, &r.dataset, r.setting.parse().unwrap_or_default(), &r.method).display()
    )
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Optimize(common) => {
            let cfg = common.resolve()?;
            let r = experiment::cmd_optimize(&cfg)?;
            println!("{}", row_line(&r, &cfg.out));
        }
        Command::Baseline { common, method } => {
            let cfg = common.resolve()?;
            experiment::resolve_methods(&cfg, &method)?;
            for r in experiment::cmd_baseline(&cfg, &method)? {
                println!("{}", row_line(&r, &cfg.out));
            }
        }
        Command::Bench {
            config,
            jobs,
            force,
            out,
        } => {
            let configs = experiment::config_files(&config)?
                .iter()
                .map(ExperimentConfig::load)
                .collect::<Result<Vec<_>>>()?;
            let outcome = experiment::cmd_bench(&configs, &out, jobs, force)?;
            for c in outcome.cells.iter().filter(|c| c.error.is_some()) {
                eprintln!(
                    "failed {}/{}/{}: {}",
                    c.dataset,
                    c.setting,
                    c.method,
                    c.error.as_deref().unwrap_or_default()
                );
            }
            let resumed = outcome.cells.iter().filter(|c| c.resumed).count();
            println!(
                "bench: {} cells, {} resumed, {} failed; summary in {}",
                outcome.cells.len(),
                resumed,
                outcome.failed(),
                outcome.report_dir.display()
            );
            if outcome.failed() > 0 {
                return Ok(1);
            }
        }
        Command::Report { results } => {
            let outcome = experiment::cmd_report(&results)?;
            println!(
                "report: {} rows, {} trajectories; summary in {}",
                outcome.reports.len(),
                outcome.trajectories.len(),
                outcome.report_dir.display()
            );
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(experiment::exit_code(&e))
        }
    }
}
