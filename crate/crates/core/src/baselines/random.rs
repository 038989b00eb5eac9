use serde_json::json;

use super::{subsample, test_score, ContextSize, Inputs, Report};
use crate::error::{Error, EvalError, Result};
use crate::evaluator::{balanced_accuracy, Budget, ContextSelection, Prediction};
use crate::rng::{self, StreamRng};

const TAG_H1: u64 = 0x41;
const TAG_H2: u64 = 0x42;
const TAG_H3: u64 = 0x43;

/// `min(n_C, n)` uniform rows and, when `d > d_C`, `d_C` uniform columns.
pub fn random_context(n: usize, d: usize, budget: &Budget, rng: &mut StreamRng) -> ContextSelection {
    let samples = subsample(n, budget.max_samples, rng);
    let features = subsample(d, budget.max_features, rng);
    ContextSelection::new(samples, features).expect("non-empty table")
}

/// The contexts used by run `0..runs` of a random baseline with stream tag
/// `tag`.
pub fn random_contexts(
    n: usize,
    d: usize,
    budget: &Budget,
    runs: usize,
    seed: u64,
    tag: u64,
) -> Vec<ContextSelection> {
    (0..runs)
        .map(|r| random_context(n, d, budget, &mut rng::stream(seed, &[tag, r as u64])))
        .collect()
}

/// Mean test balanced accuracy over `runs` independent random contexts.
pub fn random_mean(inputs: Inputs<'_>, runs: usize, seed: u64) -> Result<Report> {
    let (n, d) = (inputs.train.n_rows(), inputs.train.n_cols());
    let contexts = random_contexts(n, d, inputs.budget, runs, seed, TAG_H1);
    let scores = contexts
        .iter()
        .map(|ctx| test_score(inputs, ctx))
        .collect::<Result<Vec<_>>>()?;
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let mut report = Report::new("h1", mean, ContextSize::from(&contexts[0]), seed);
    report.per_run_scores = Some(scores);
    report.details = json!({ "runs": runs });
    Ok(report)
}

/// Test balanced accuracy of the elementwise mean of `runs` random contexts'
/// probabilities. Per-member scores are kept for reference.
pub fn ensemble(inputs: Inputs<'_>, runs: usize, seed: u64) -> Result<Report> {
    let (n, d) = (inputs.train.n_rows(), inputs.train.n_cols());
    let contexts = random_contexts(n, d, inputs.budget, runs, seed, TAG_H2);
    let preds = contexts
        .iter()
        .map(|ctx| inputs.evaluator.score_context(inputs.train, ctx, inputs.test))
        .collect::<Result<Vec<_>, EvalError>>()?;
    let members = preds
        .iter()
        .map(|p| balanced_accuracy(p, inputs.test.labels()))
        .collect::<Result<Vec<_>, EvalError>>()?;
    let averaged = Prediction::average(&preds)?;
    let score = balanced_accuracy(&averaged, inputs.test.labels())?;
    let mut report = Report::new("h2", score, ContextSize::from(&contexts[0]), seed);
    report.per_run_scores = Some(members);
    report.details = json!({
        "members": runs,
        "aggregation": "probability mean",
        "member_streams": (0..runs).map(|r| rng::stream_key(seed, &[TAG_H2, r as u64])).collect::<Vec<_>>(),
    });
    Ok(report)
}

/// Sample counts tried by the backoff: `n`, then `floor(backoff^k * n)` for
/// `k = 1, 2, ...`, never below 1, ending at the first size of 1.
pub fn xl_sizes(n: usize, backoff: f64) -> impl Iterator<Item = usize> {
    let mut k = 0;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        // The small offset keeps exact products such as 0.81 * 1500 from
        // landing a hair below the integer.
        let size = ((backoff.powi(k) * n as f64 + 1e-9).floor() as usize).max(1);
        k += 1;
        done = size == 1;
        Some(size)
    })
}

/// The largest context the evaluator accepts: the full training set (with
/// columns subsampled to `d_C` when needed), shrunk by `backoff` and
/// resampled after every capacity error.
pub fn xl_context(inputs: Inputs<'_>, backoff: f64, seed: u64) -> Result<Report> {
    let (n, d) = (inputs.train.n_rows(), inputs.train.n_cols());
    let features = subsample(
        d,
        inputs.budget.max_features,
        &mut rng::stream(seed, &[TAG_H3, 0]),
    );
    let mut attempts = Vec::new();
    for (k, size) in xl_sizes(n, backoff).enumerate() {
        attempts.push(size);
        let samples = subsample(n, size, &mut rng::stream(seed, &[TAG_H3, 1, k as u64]));
        let ctx = ContextSelection::new(samples, features.clone())?;
        match inputs.evaluator.score_context(inputs.train, &ctx, inputs.test) {
            Ok(pred) => {
                let score = balanced_accuracy(&pred, inputs.test.labels())?;
                let mut report = Report::new("h3", score, ContextSize::from(&ctx), seed);
                report.details = json!({ "attempts": attempts, "backoff": backoff });
                return Ok(report);
            }
            Err(EvalError::CapacityExceeded { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(Error::Degenerate(format!(
        "the evaluator rejected every context size down to 1 row (tried {attempts:?})"
    )))
}
