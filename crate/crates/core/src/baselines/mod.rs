//! Comparison methods sharing the evaluator and budget with the engine.
//!
//! | id | method |
//! |----|--------|
//! | h1 | mean over independent random contexts |
//! | h2 | probability-averaged ensemble of random contexts |
//! | h3 | largest context the evaluator accepts, shrinking by a backoff factor |
//! | o1 | k-means representatives of features, then rows |
//! | o2 | decision-tree routing of queries to leaf contexts |
//!
//! Every method reports test balanced accuracy.

mod kmeans;
mod random;
mod tree;

use std::time::Instant;

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use kmeans::{kmeans, kmeans_reps, nearest_unique, KMeansResult};
pub use random::{ensemble, random_context, random_contexts, random_mean, xl_context, xl_sizes};
pub use tree::{dt_router, feature_tree, DecisionTree, FeatureMode, Node, RouterParams};

use crate::data::Table;
use crate::error::{Error, Result};
use crate::evaluator::{balanced_accuracy, Budget, ContextSelection, Evaluator};
use crate::rng::StreamRng;

fn default_runs_h1() -> usize {
    15
}

fn default_runs_h2() -> usize {
    20
}

fn default_backoff() -> f64 {
    0.9
}

fn default_inits() -> usize {
    5
}

fn default_max_depth() -> usize {
    50
}

fn default_top_splits() -> usize {
    3
}

/// Which baseline to run, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineKind {
    RandomMean {
        #[serde(default = "default_runs_h1")]
        runs: usize,
    },
    Ensemble {
        #[serde(default = "default_runs_h2")]
        runs: usize,
    },
    XlContext {
        #[serde(default = "default_backoff")]
        backoff: f64,
    },
    KmeansReps {
        #[serde(default = "default_inits")]
        inits: usize,
    },
    DtRouter {
        /// Rows per leaf; defaults to the budget's row limit.
        #[serde(default)]
        min_leaf: Option<usize>,
        #[serde(default = "default_max_depth")]
        max_depth: usize,
        #[serde(default = "default_top_splits")]
        top_splits: usize,
        #[serde(default = "default_inits")]
        inits: usize,
        #[serde(default)]
        feature_mode: FeatureMode,
    },
}

impl BaselineKind {
    /// Default parameters for a method id (`h1`..`h3`, `o1`, `o2`).
    pub fn from_id(id: &str) -> Option<Self> {
        Some(match id {
            "h1" => BaselineKind::RandomMean {
                runs: default_runs_h1(),
            },
            "h2" => BaselineKind::Ensemble {
                runs: default_runs_h2(),
            },
            "h3" => BaselineKind::XlContext {
                backoff: default_backoff(),
            },
            "o1" => BaselineKind::KmeansReps {
                inits: default_inits(),
            },
            "o2" => BaselineKind::DtRouter {
                min_leaf: None,
                max_depth: default_max_depth(),
                top_splits: default_top_splits(),
                inits: default_inits(),
                feature_mode: FeatureMode::default(),
            },
            _ => return None,
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            BaselineKind::RandomMean { .. } => "h1",
            BaselineKind::Ensemble { .. } => "h2",
            BaselineKind::XlContext { .. } => "h3",
            BaselineKind::KmeansReps { .. } => "o1",
            BaselineKind::DtRouter { .. } => "o2",
        }
    }

    pub const IDS: [&'static str; 5] = ["h1", "h2", "h3", "o1", "o2"];

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::config(field, msg));
        match *self {
            BaselineKind::RandomMean { runs } | BaselineKind::Ensemble { runs } if runs == 0 => {
                bad("runs", "must be at least 1")
            }
            BaselineKind::XlContext { backoff } if !(backoff > 0.0 && backoff < 1.0) => {
                bad("backoff", "must lie in (0, 1)")
            }
            BaselineKind::KmeansReps { inits: 0 } => bad("inits", "must be at least 1"),
            BaselineKind::DtRouter {
                min_leaf,
                max_depth,
                top_splits,
                inits,
                ..
            } => {
                if min_leaf == Some(0) {
                    bad("min_leaf", "must be at least 1")
                } else if max_depth == 0 || top_splits == 0 || inits == 0 {
                    bad("dt_router", "max_depth, top_splits and inits must be at least 1")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub kind: BaselineKind,
    pub seed: u64,
}

impl BaselineSpec {
    pub fn new(kind: BaselineKind, seed: u64) -> Self {
        BaselineSpec { kind, seed }
    }
}

/// The data a method sees.
#[derive(Clone, Copy)]
pub struct Inputs<'a> {
    pub train: &'a Table,
    pub val: &'a Table,
    pub test: &'a Table,
    pub evaluator: &'a dyn Evaluator,
    pub budget: &'a Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSize {
    pub samples: usize,
    pub features: usize,
}

impl From<&ContextSelection> for ContextSize {
    fn from(ctx: &ContextSelection) -> Self {
        ContextSize {
            samples: ctx.n_samples(),
            features: ctx.n_features(),
        }
    }
}

/// One result row, shared by the engine and every baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(default)]
    pub dataset: String,
    pub method: String,
    #[serde(default)]
    pub setting: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_run_scores: Option<Vec<f64>>,
    pub context_size: ContextSize,
    pub wall_time: f64,
    pub seed: u64,
    #[serde(default)]
    pub details: serde_json::Value,
}

impl Report {
    pub(crate) fn new(method: &str, score: f64, context_size: ContextSize, seed: u64) -> Self {
        Report {
            dataset: String::new(),
            method: method.into(),
            setting: String::new(),
            score,
            per_run_scores: None,
            context_size,
            wall_time: 0.0,
            seed,
            details: serde_json::Value::Null,
        }
    }
}

/// Runs one baseline and fills in its wall time.
pub fn run_baseline(spec: &BaselineSpec, inputs: Inputs<'_>) -> Result<Report> {
    spec.kind.validate()?;
    let start = Instant::now();
    let mut report = match &spec.kind {
        BaselineKind::RandomMean { runs } => random_mean(inputs, *runs, spec.seed),
        BaselineKind::Ensemble { runs } => ensemble(inputs, *runs, spec.seed),
        BaselineKind::XlContext { backoff } => xl_context(inputs, *backoff, spec.seed),
        BaselineKind::KmeansReps { inits } => kmeans_reps(inputs, *inits, spec.seed),
        BaselineKind::DtRouter {
            min_leaf,
            max_depth,
            top_splits,
            inits,
            feature_mode,
        } => dt_router(
            inputs,
            &RouterParams {
                min_leaf: min_leaf.unwrap_or(inputs.budget.max_samples),
                max_depth: *max_depth,
                top_splits: *top_splits,
                inits: *inits,
                feature_mode: *feature_mode,
            },
            spec.seed,
        ),
    }?;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Test balanced accuracy of one context.
pub fn test_score(inputs: Inputs<'_>, ctx: &ContextSelection) -> Result<f64> {
    let pred = inputs.evaluator.score_context(inputs.train, ctx, inputs.test)?;
    Ok(balanced_accuracy(&pred, inputs.test.labels())?)
}

/// Validation balanced accuracy of one context.
pub(crate) fn val_score(inputs: Inputs<'_>, ctx: &ContextSelection) -> Result<f64> {
    let pred = inputs.evaluator.score_context(inputs.train, ctx, inputs.val)?;
    Ok(balanced_accuracy(&pred, inputs.val.labels())?)
}

/// `k` of `n` indices uniformly without replacement, sorted; everything when
/// `k >= n`.
pub(crate) fn subsample(n: usize, k: usize, rng: &mut StreamRng) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    let mut idx = index::sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}
