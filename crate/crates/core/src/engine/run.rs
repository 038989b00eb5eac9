use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{sampling_distribution, temperature_schedule, SubsetSampler};
use super::select::{class_coverage_fixup, select_items};
use super::sgd::sgd_step_in_place;
use super::universe::{ItemUniverse, SubsetObservation, ValueVector};
use crate::data::Table;
use crate::error::{Error, EvalError, Result};
use crate::evaluator::{Budget, ContextSelection, Evaluator, Metric};
use crate::rng;

/// Starting values `φ^(0)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Initializer {
    /// `1/S` everywhere.
    Uniform,
    /// Uniform values, then after the first round's scores every item is
    /// reset to `mean(p) / m` with `m` items per subset, so the first
    /// residuals are centred. The first round draws from the same uniform
    /// distribution either way.
    ///
    /// With fewer observations than items the regression never forgets its
    /// starting point, and from `1/S` the early steps that lift the overall
    /// level land on whichever items happened to be drawn first.
    #[default]
    MatchedLevel,
    /// Caller-supplied values, one per item.
    Custom { values: Vec<f64> },
}

/// Engine settings. Defaults: `eta = 2`, `batch = 32`, `learning_rate = 0.1`,
/// matched-level start, no intercept, class coverage on, one evaluator call
/// at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub rounds: usize,
    pub eta: f64,
    pub batch: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub metric: Metric,
    pub intercept: bool,
    pub class_coverage_fixup: bool,
    /// Concurrent evaluator calls within a round.
    pub parallel_eval: usize,
    /// Run the temperature schedules concurrently.
    pub parallel_runs: bool,
    /// Stop a run after `ceil(rounds / 4)` rounds without improvement.
    pub early_stop: bool,
    pub initializer: Initializer,
    /// Limit the step to `1 / m` for subsets of `m` items. Each step moves
    /// `c·φ` by about `2·lr·m` times the residual, so larger steps overshoot
    /// once subsets hold more than a handful of items.
    pub cap_step_by_cardinality: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            rounds: 100,
            eta: 2.0,
            batch: 32,
            learning_rate: 0.1,
            seed: 42,
            metric: Metric::default(),
            intercept: false,
            class_coverage_fixup: true,
            parallel_eval: 1,
            parallel_runs: false,
            early_stop: false,
            initializer: Initializer::MatchedLevel,
            cap_step_by_cardinality: true,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::config("rounds", "must be at least 1"));
        }
        if !(self.eta > 1.0 && self.eta.is_finite()) {
            return Err(Error::config("eta", "must be a finite number above 1"));
        }
        if self.batch == 0 {
            return Err(Error::config("batch", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate", "must be positive"));
        }
        if self.parallel_eval == 0 {
            return Err(Error::config("parallel_eval", "must be at least 1"));
        }
        Ok(())
    }

    /// Step size actually used for subsets of `members` items.
    pub fn effective_learning_rate(&self, members: usize) -> f64 {
        if self.cap_step_by_cardinality && members > 0 {
            self.learning_rate.min(1.0 / members as f64)
        } else {
            self.learning_rate
        }
    }

    pub fn temperatures(&self) -> Vec<f64> {
        temperature_schedule(self.rounds, self.eta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Estimated validation performance of the selection after this round.
    pub estimated_val: f64,
    pub best_so_far: f64,
    pub elapsed_seconds: f64,
    pub round_seconds: f64,
    /// Wall time spent inside evaluator calls during this round.
    pub evaluator_seconds: f64,
}

impl RoundRecord {
    /// Round time excluding the evaluator.
    pub fn engine_seconds(&self) -> f64 {
        (self.round_seconds - self.evaluator_seconds).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run: usize,
    pub tau: f64,
    pub phi_final: ValueVector,
    pub intercept: Option<f64>,
    pub selected: ContextSelection,
    /// Active item indices of `selected`.
    pub selected_items: Vec<usize>,
    /// Sum of the selected items' values, plus the intercept when fitted.
    pub estimated_val: f64,
    pub trajectory: Vec<RoundRecord>,
    pub evaluator_calls: usize,
    pub learning_rate: f64,
    pub coverage_swaps: usize,
    pub wall_time: f64,
}

impl RunResult {
    pub fn best_so_far(&self) -> f64 {
        self.trajectory
            .last()
            .map_or(f64::NEG_INFINITY, |r| r.best_so_far)
    }
}

/// A run aborted by its evaluator, with the rounds completed before that.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunFailure {
    pub run: usize,
    pub tau: f64,
    pub round: usize,
    #[serde(serialize_with = "as_display")]
    pub error: EvalError,
    pub trajectory: Vec<RoundRecord>,
}

fn as_display<S: serde::Serializer>(e: &EvalError, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(e)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeOutcome {
    pub selection: ContextSelection,
    /// Index into `runs` of the winning run.
    pub best: usize,
    pub runs: Vec<RunResult>,
    pub failures: Vec<RunFailure>,
}

impl OptimizeOutcome {
    pub fn best_run(&self) -> &RunResult {
        &self.runs[self.best]
    }
}

/// The current selection, its estimate, and the coverage swaps it needed.
fn current_selection(
    phi: &[f64],
    intercept: Option<f64>,
    universe: &ItemUniverse,
    train: &Table,
    fixup: bool,
) -> (Vec<usize>, f64, usize) {
    let mut items = select_items(phi, universe);
    let mut swaps = 0;
    if fixup && universe.optimize_samples() {
        let split = items.partition_point(|&i| i < universe.n());
        let mut rows = items[..split].to_vec();
        swaps = class_coverage_fixup(&mut rows, train.labels(), train.class_count(), |r| phi[r]);
        if swaps > 0 {
            rows.extend_from_slice(&items[split..]);
            items = rows;
        }
    }
    let estimate = items.iter().map(|&i| phi[i]).sum::<f64>() + intercept.unwrap_or(0.0);
    (items, estimate, swaps)
}

/// One temperature run: `rounds` rounds of sample, score, and step, then
/// selection of the top positive items.
pub fn run_single(
    train: &Table,
    val: &Table,
    evaluator: &dyn Evaluator,
    budget: &Budget,
    config: &EngineConfig,
    run: usize,
    tau: f64,
) -> std::result::Result<RunResult, RunFailure> {
    let start = Instant::now();
    let fail = |round: usize, error: EvalError, trajectory: Vec<RoundRecord>| RunFailure {
        run,
        tau,
        round,
        error,
        trajectory,
    };
    let universe = ItemUniverse::new(train.n_rows(), train.n_cols(), budget)
        .map_err(|e| fail(0, EvalError::InvalidContext(e.to_string()), Vec::new()))?;
    let s = universe.len();
    let mut phi = match &config.initializer {
        Initializer::Custom { values } if values.len() == s => values.clone(),
        Initializer::Custom { values } => {
            return Err(fail(
                0,
                EvalError::InvalidContext(format!("initializer has {} values for {s} items", values.len())),
                Vec::new(),
            ))
        }
        _ => ValueVector::uniform(s).0,
    };
    let mut intercept = config.intercept.then_some(0.0);
    let members = universe.members_per_subset();
    let lr = config.effective_learning_rate(members);
    let pool = (config.parallel_eval > 1)
        .then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.parallel_eval)
                .build()
                .ok()
        })
        .flatten();

    let patience = config.rounds.div_ceil(4);
    let mut trajectory: Vec<RoundRecord> = Vec::with_capacity(config.rounds);
    let mut best = f64::NEG_INFINITY;
    let mut best_round = 0;
    let mut calls = 0;
    let run_key = run as u64;

    for t in 0..config.rounds {
        let round_start = Instant::now();
        let dist = sampling_distribution(&phi, tau);
        let sampler = SubsetSampler::new(&dist, &universe);
        let mut draws = Vec::with_capacity(config.batch);
        for b in 0..config.batch {
            let mut r = rng::stream(config.seed, &[run_key, t as u64, b as u64, 0]);
            let items = sampler.draw(&mut r);
            let ctx = universe
                .to_context(&items)
                .map_err(|e| fail(t, e, trajectory.clone()))?;
            draws.push((b, items, ctx));
        }

        let eval_start = Instant::now();
        let score = |(b, _, ctx): &(usize, Vec<usize>, ContextSelection)| {
            let key = rng::stream_key(config.seed, &[run_key, t as u64, *b as u64, 1]);
            evaluator.score_subset(train, ctx, val, config.metric, key)
        };
        let scores: Vec<std::result::Result<f64, EvalError>> = match &pool {
            Some(pool) => pool.install(|| draws.par_iter().map(score).collect()),
            None => draws.iter().map(score).collect(),
        };
        let evaluator_seconds = eval_start.elapsed().as_secs_f64();
        calls += scores.len();

        let mut batch = Vec::with_capacity(config.batch);
        for ((b, items, _), p) in draws.into_iter().zip(scores) {
            let performance = p.map_err(|e| fail(t, e, trajectory.clone()))?;
            batch.push(SubsetObservation {
                members: items,
                performance,
                run,
                round: t,
                slot: b,
            });
        }

        if t == 0 && config.initializer == Initializer::MatchedLevel {
            let mean = batch.iter().map(|o| o.performance).sum::<f64>() / batch.len() as f64;
            phi.iter_mut().for_each(|v| *v = mean / members as f64);
        }
        sgd_step_in_place(&mut phi, &mut intercept, &batch, lr);

        let (_, estimate, _) =
            current_selection(&phi, intercept, &universe, train, config.class_coverage_fixup);
        if estimate > best {
            best = estimate;
            best_round = t;
        }
        trajectory.push(RoundRecord {
            round: t,
            estimated_val: estimate,
            best_so_far: best,
            elapsed_seconds: start.elapsed().as_secs_f64(),
            round_seconds: round_start.elapsed().as_secs_f64(),
            evaluator_seconds,
        });
        if config.early_stop && t - best_round >= patience {
            break;
        }
    }

    let (items, estimated_val, coverage_swaps) =
        current_selection(&phi, intercept, &universe, train, config.class_coverage_fixup);
    let selected = universe
        .to_context(&items)
        .map_err(|e| fail(trajectory.len(), e, trajectory.clone()))?;
    Ok(RunResult {
        run,
        tau,
        phi_final: ValueVector(phi),
        intercept,
        selected,
        selected_items: items,
        estimated_val,
        trajectory,
        evaluator_calls: calls,
        learning_rate: lr,
        coverage_swaps,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Runs every temperature of the schedule and returns the selection with the
/// largest estimated validation performance. Ties go to the earlier run.
pub fn optimize(
    train: &Table,
    val: &Table,
    evaluator: &dyn Evaluator,
    budget: &Budget,
    config: &EngineConfig,
) -> Result<OptimizeOutcome> {
    config.validate()?;
    // Surface universe errors directly rather than as per-run failures.
    ItemUniverse::new(train.n_rows(), train.n_cols(), budget)?;
    if val.n_cols() != train.n_cols() {
        return Err(Error::InvalidSpec(format!(
            "validation table has {} columns, training table has {}",
            val.n_cols(),
            train.n_cols()
        )));
    }
    let taus = config.temperatures();
    let go = |(run, &tau): (usize, &f64)| run_single(train, val, evaluator, budget, config, run, tau);
    let outcomes: Vec<_> = if config.parallel_runs {
        taus.par_iter().enumerate().map(go).collect()
    } else {
        taus.iter().enumerate().map(go).collect()
    };
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => runs.push(r),
            Err(f) => failures.push(f),
        }
    }
    if runs.is_empty() {
        let first = failures.first().map_or_else(String::new, |f| f.error.to_string());
        return Err(Error::AllRunsFailed(first));
    }
    let mut best = 0;
    for (i, r) in runs.iter().enumerate().skip(1) {
        if r.estimated_val > runs[best].estimated_val {
            best = i;
        }
    }
    Ok(OptimizeOutcome {
        selection: runs[best].selected.clone(),
        best,
        runs,
        failures,
    })
}
