use rand_distr::{Distribution, Normal};

use super::{check_query, ContextSelection, Evaluator, Metric, Prediction};
use crate::data::Table;
use crate::engine::{Item, ItemUniverse};
use crate::error::{EvalError, Result};
use crate::rng;

/// Synthetic scorer whose performance is additive in the context items:
/// `clip(base + sum of member weights + noise, 0, 1)`.
///
/// Exists to check that the engine recovers known item values. It has no
/// predictive output, so only [`Evaluator::score_subset`] is supported.
#[derive(Debug, Clone)]
pub struct AdditiveOracle {
    sample_weights: Option<Vec<f64>>,
    feature_weights: Option<Vec<f64>>,
    base: f64,
    noise: Option<Normal<f64>>,
    seed: u64,
}

impl AdditiveOracle {
    /// `weights` holds one entry per item of `universe`.
    pub fn from_item_weights(
        weights: &[f64],
        universe: &ItemUniverse,
        base: f64,
        noise_sd: f64,
        seed: u64,
    ) -> Result<Self> {
        if weights.len() != universe.len() {
            return Err(crate::Error::InvalidSpec(format!(
                "oracle has {} weights for {} items",
                weights.len(),
                universe.len()
            )));
        }
        if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
            return Err(crate::Error::InvalidSpec(
                "noise_sd must be finite and >= 0".into(),
            ));
        }
        let mut sample_weights = universe.optimize_samples().then(|| vec![0.0; universe.n()]);
        let mut feature_weights = universe.optimize_features().then(|| vec![0.0; universe.d()]);
        for (i, &w) in weights.iter().enumerate() {
            match universe.item(i) {
                Item::Sample(j) => sample_weights.as_mut().expect("active")[j] = w,
                Item::Feature(j) => feature_weights.as_mut().expect("active")[j] = w,
            }
        }
        Ok(AdditiveOracle {
            sample_weights,
            feature_weights,
            base,
            noise: (noise_sd > 0.0).then(|| Normal::new(0.0, noise_sd).expect("valid sd")),
            seed,
        })
    }

    /// Noise-free performance of `ctx`, before clipping.
    pub fn raw_value(&self, ctx: &ContextSelection) -> f64 {
        let sum = |w: &Option<Vec<f64>>, idx: &[usize]| -> f64 {
            w.as_ref().map_or(0.0, |w| idx.iter().map(|&i| w[i]).sum())
        };
        self.base + sum(&self.sample_weights, ctx.samples()) + sum(&self.feature_weights, ctx.features())
    }
}

impl Evaluator for AdditiveOracle {
    fn score_context(&self, _: &Table, _: &ContextSelection, _: &Table) -> Result<Prediction, EvalError> {
        Err(EvalError::Unsupported(
            "the additive oracle scores subsets but produces no predictions".into(),
        ))
    }

    fn score_subset(
        &self,
        train: &Table,
        ctx: &ContextSelection,
        val: &Table,
        _metric: Metric,
        stream: u64,
    ) -> Result<f64, EvalError> {
        check_query(train, ctx, val)?;
        let eps = match &self.noise {
            Some(n) => n.sample(&mut rng::stream(self.seed, &[stream])),
            None => 0.0,
        };
        Ok((self.raw_value(ctx) + eps).clamp(0.0, 1.0))
    }

    fn name(&self) -> String {
        "additive_oracle".into()
    }
}
