//! The black-box scorer.
//!
//! An [`Evaluator`] receives a training table, a [`ContextSelection`] over its
//! rows and columns, and a query table, and returns class probabilities for
//! every query row. Nothing else about the model is visible to the engine or
//! the baselines.

pub mod bridge;
mod knn;
pub mod metrics;
mod oracle;

use serde::{Deserialize, Serialize};

pub use bridge::{BridgeConfig, BridgeEvaluator};
pub use knn::KnnSurrogate;
pub use metrics::{auroc, balanced_accuracy, Metric};
pub use oracle::AdditiveOracle;

use crate::data::Table;
use crate::engine::ItemUniverse;
pub use crate::error::EvalError;
use crate::error::Result;

/// Context capacity of the model: at most `max_samples` rows and
/// `max_features` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_samples: usize,
    pub max_features: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_samples: 1000,
            max_features: 100,
        }
    }
}

impl Budget {
    pub fn new(max_samples: usize, max_features: usize) -> Result<Self> {
        if max_samples == 0 || max_features == 0 {
            return Err(crate::Error::InvalidSpec(
                "budget limits must be at least 1".into(),
            ));
        }
        Ok(Budget {
            max_samples,
            max_features,
        })
    }

    pub fn admits(&self, ctx: &ContextSelection) -> bool {
        ctx.n_samples() <= self.max_samples && ctx.n_features() <= self.max_features
    }
}

/// A context: training rows and feature columns, both sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContextSelection {
    sample_indices: Vec<usize>,
    feature_indices: Vec<usize>,
}

impl ContextSelection {
    /// Sorts and deduplicates both index lists; fails if either is empty.
    pub fn new(mut samples: Vec<usize>, mut features: Vec<usize>) -> Result<Self, EvalError> {
        samples.sort_unstable();
        samples.dedup();
        features.sort_unstable();
        features.dedup();
        if samples.is_empty() || features.is_empty() {
            return Err(EvalError::InvalidContext(
                "a context needs at least one sample and one feature".into(),
            ));
        }
        Ok(ContextSelection {
            sample_indices: samples,
            feature_indices: features,
        })
    }

    /// Every row and column of `train`.
    pub fn full(train: &Table) -> Self {
        ContextSelection {
            sample_indices: (0..train.n_rows()).collect(),
            feature_indices: (0..train.n_cols()).collect(),
        }
    }

    pub fn samples(&self) -> &[usize] {
        &self.sample_indices
    }

    pub fn features(&self) -> &[usize] {
        &self.feature_indices
    }

    pub fn n_samples(&self) -> usize {
        self.sample_indices.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_indices.len()
    }

    /// Checks the indices against `train`.
    pub fn validate(&self, train: &Table) -> Result<(), EvalError> {
        if self.sample_indices.last().is_some_and(|&i| i >= train.n_rows()) {
            return Err(EvalError::InvalidContext(format!(
                "sample index out of range for {} rows",
                train.n_rows()
            )));
        }
        if self.feature_indices.last().is_some_and(|&j| j >= train.n_cols()) {
            return Err(EvalError::InvalidContext(format!(
                "feature index out of range for {} columns",
                train.n_cols()
            )));
        }
        Ok(())
    }

    /// Context rows and columns materialized as a table.
    pub fn materialize(&self, train: &Table) -> Table {
        train.select(&self.sample_indices, &self.feature_indices)
    }
}

/// Class probabilities, one row per query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    n_classes: usize,
    proba: Vec<f64>,
}

/// Rows within this distance of 1 are accepted as-is.
pub const PROBA_TOLERANCE: f64 = 1e-6;
/// Rows within this distance of 1 are renormalized; beyond it they are rejected.
pub const PROBA_RENORMALIZE: f64 = 1e-3;

impl Prediction {
    pub fn new(rows: Vec<Vec<f64>>, n_classes: usize) -> Result<Self, EvalError> {
        if let Some(i) = rows.iter().position(|r| r.len() != n_classes) {
            return Err(EvalError::MalformedProbabilities {
                row: i,
                reason: format!("{} entries for {n_classes} classes", rows[i].len()),
            });
        }
        Prediction::from_flat(rows.concat(), n_classes)
    }

    /// Validates a row-major probability matrix, renormalizing rows whose sum
    /// is off by less than [`PROBA_RENORMALIZE`].
    pub fn from_flat(mut proba: Vec<f64>, n_classes: usize) -> Result<Self, EvalError> {
        if n_classes == 0 || !proba.len().is_multiple_of(n_classes) {
            return Err(EvalError::MalformedProbabilities {
                row: 0,
                reason: format!("{} values do not form rows of {n_classes}", proba.len()),
            });
        }
        for (i, row) in proba.chunks_mut(n_classes).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(EvalError::MalformedProbabilities {
                    row: i,
                    reason: "negative or non-finite entry".into(),
                });
            }
            let sum: f64 = row.iter().sum();
            let err = (sum - 1.0).abs();
            if err > PROBA_RENORMALIZE {
                return Err(EvalError::MalformedProbabilities {
                    row: i,
                    reason: format!("row sums to {sum}"),
                });
            }
            if err > PROBA_TOLERANCE {
                row.iter_mut().for_each(|p| *p /= sum);
            }
        }
        Ok(Prediction { n_classes, proba })
    }

    pub fn n_rows(&self) -> usize {
        self.proba.len() / self.n_classes
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.proba[i * self.n_classes..(i + 1) * self.n_classes]
    }

    pub fn values(&self) -> &[f64] {
        &self.proba
    }

    /// Most probable class; ties go to the lowest index.
    pub fn argmax(&self, i: usize) -> usize {
        let row = self.row(i);
        let mut best = 0;
        for (c, &p) in row.iter().enumerate().skip(1) {
            if p > row[best] {
                best = c;
            }
        }
        best
    }

    /// Elementwise mean of predictions with matching shape.
    pub fn average(preds: &[Prediction]) -> Result<Prediction, EvalError> {
        let first = preds
            .first()
            .ok_or_else(|| EvalError::Metric("nothing to average".into()))?;
        if preds
            .iter()
            .any(|p| p.proba.len() != first.proba.len() || p.n_classes != first.n_classes)
        {
            return Err(EvalError::Metric("predictions differ in shape".into()));
        }
        let m = preds.len() as f64;
        let proba = (0..first.proba.len())
            .map(|i| preds.iter().map(|p| p.proba[i]).sum::<f64>() / m)
            .collect();
        Prediction::from_flat(proba, first.n_classes)
    }
}

/// A frozen in-context classifier behind a scoring interface.
pub trait Evaluator: Send + Sync {
    /// Class probabilities for every row of `query`, conditioned on the
    /// context `ctx` of `train`. Query columns are restricted to the
    /// context's features.
    fn score_context(
        &self,
        train: &Table,
        ctx: &ContextSelection,
        query: &Table,
    ) -> Result<Prediction, EvalError>;

    /// Performance of `ctx` on the labeled `val` set. `stream` identifies the
    /// calling slot for evaluators that need randomness.
    fn score_subset(
        &self,
        train: &Table,
        ctx: &ContextSelection,
        val: &Table,
        metric: Metric,
        stream: u64,
    ) -> Result<f64, EvalError> {
        let _ = stream;
        let pred = self.score_context(train, ctx, val)?;
        metric.evaluate(&pred, val.labels())
    }

    fn name(&self) -> String;
}

pub(crate) fn check_query(train: &Table, ctx: &ContextSelection, query: &Table) -> Result<(), EvalError> {
    ctx.validate(train)?;
    if query.n_cols() != train.n_cols() {
        return Err(EvalError::InvalidContext(format!(
            "query has {} columns, train has {}",
            query.n_cols(),
            train.n_cols()
        )));
    }
    Ok(())
}

fn default_k() -> usize {
    5
}

fn default_timeout() -> f64 {
    60.0
}

fn default_connections() -> usize {
    1
}

/// Serializable evaluator choice used by configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvaluatorKind {
    Knn {
        #[serde(default = "default_k")]
        k: usize,
        /// Hard capacity; larger contexts fail with a capacity error.
        #[serde(default)]
        capacity: Option<Budget>,
    },
    AdditiveOracle {
        /// One weight per optimizable item (samples first, then features).
        weights: Vec<f64>,
        #[serde(default)]
        base: f64,
        #[serde(default)]
        noise_sd: f64,
        #[serde(default)]
        seed: u64,
    },
    ExternalBridge {
        command: String,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default = "default_timeout")]
        timeout_secs: f64,
        #[serde(default = "default_connections")]
        connections: usize,
    },
}

impl Default for EvaluatorKind {
    fn default() -> Self {
        EvaluatorKind::Knn {
            k: default_k(),
            capacity: None,
        }
    }
}

impl EvaluatorKind {
    /// Instantiates the evaluator for a training table under `budget`.
    pub fn build(&self, train: &Table, budget: &Budget) -> Result<Box<dyn Evaluator>> {
        Ok(match self {
            EvaluatorKind::Knn { k, capacity } => Box::new(KnnSurrogate::new(*k, *capacity)?),
            EvaluatorKind::AdditiveOracle {
                weights,
                base,
                noise_sd,
                seed,
            } => {
                let universe = ItemUniverse::new(train.n_rows(), train.n_cols(), budget)?;
                Box::new(AdditiveOracle::from_item_weights(
                    weights, &universe, *base, *noise_sd, *seed,
                )?)
            }
            EvaluatorKind::ExternalBridge {
                command,
                args,
                timeout_secs,
                connections,
            } => Box::new(BridgeEvaluator::spawn(&BridgeConfig {
                command: command.clone(),
                args: args.clone(),
                timeout: std::time::Duration::from_secs_f64(*timeout_secs),
                connections: *connections,
            })?),
        })
    }
}
