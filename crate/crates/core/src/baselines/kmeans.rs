use rand::Rng;
use serde_json::json;

use super::{subsample, test_score, val_score, ContextSize, Inputs, Report};
use crate::error::Result;
use crate::evaluator::ContextSelection;
use crate::rng::{self, StreamRng};

const TAG_O1: u64 = 0x51;
const MAX_ITER: usize = 100;
const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// Row-major `k x dim`.
    pub centroids: Vec<f64>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[f64], dim: usize) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (c, centroid) in centroids.chunks_exact(dim).enumerate() {
        let d = dist2(point, centroid);
        if d < best.0 {
            best = (d, c);
        }
    }
    best.1
}

fn plus_plus(points: &[f64], dim: usize, k: usize, rng: &mut StreamRng) -> Vec<f64> {
    let n = points.len() / dim;
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(&points[first * dim..(first + 1) * dim]);
    let mut d2: Vec<f64> = points
        .chunks_exact(dim)
        .map(|p| dist2(p, &centroids[..dim]))
        .collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            d2.iter()
                .position(|&w| {
                    acc += w;
                    acc > target
                })
                .unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            rng.random_range(0..n)
        };
        let c = &points[pick * dim..(pick + 1) * dim];
        centroids.extend_from_slice(c);
        for (w, p) in d2.iter_mut().zip(points.chunks_exact(dim)) {
            *w = w.min(dist2(p, c));
        }
    }
    centroids
}

/// Lloyd's algorithm with k-means++ seeding on row-major `points`. Stops
/// after 100 iterations or once no centroid moves more than `1e-6`. Empty
/// clusters keep their previous centroid.
pub fn kmeans(points: &[f64], dim: usize, k: usize, rng: &mut StreamRng) -> KMeansResult {
    let n = points.len() / dim;
    assert!(k >= 1 && k <= n, "k must lie in 1..=n");
    let mut centroids = plus_plus(points, dim, k, rng);
    let mut assignments = vec![0; n];
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for it in 1..=MAX_ITER {
        for (a, p) in assignments.iter_mut().zip(points.chunks_exact(dim)) {
            *a = nearest(p, &centroids, dim);
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|c| *c = 0);
        for (&a, p) in assignments.iter().zip(points.chunks_exact(dim)) {
            counts[a] += 1;
            for (s, v) in sums[a * dim..(a + 1) * dim].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c * dim..(c + 1) * dim]
                .iter()
                .map(|s| s / counts[c] as f64)
                .collect();
            shift = shift.max(dist2(&new, &centroids[c * dim..(c + 1) * dim]).sqrt());
            centroids[c * dim..(c + 1) * dim].copy_from_slice(&new);
        }
        if shift < TOLERANCE {
            return KMeansResult {
                centroids,
                assignments,
                iterations: it,
                converged: true,
            };
        }
    }
    for (a, p) in assignments.iter_mut().zip(points.chunks_exact(dim)) {
        *a = nearest(p, &centroids, dim);
    }
    KMeansResult {
        centroids,
        assignments,
        iterations: MAX_ITER,
        converged: false,
    }
}

/// For each centroid in order, the closest point not already picked (ties to
/// the lower index). Returns the picks in centroid order.
pub fn nearest_unique(points: &[f64], dim: usize, centroids: &[f64]) -> Vec<usize> {
    let n = points.len() / dim;
    let mut taken = vec![false; n];
    let mut picks = Vec::with_capacity(centroids.len() / dim);
    for c in centroids.chunks_exact(dim) {
        let mut best = (f64::INFINITY, usize::MAX);
        for (i, p) in points.chunks_exact(dim).enumerate() {
            if taken[i] {
                continue;
            }
            let d = dist2(p, c);
            if d < best.0 {
                best = (d, i);
            }
        }
        if best.1 == usize::MAX {
            break;
        }
        taken[best.1] = true;
        picks.push(best.1);
    }
    picks
}

/// Representatives of `k` clusters, best of `inits` seeded runs by `score`.
fn best_reps(
    points: &[f64],
    dim: usize,
    k: usize,
    inits: usize,
    seed: u64,
    stage: u64,
    mut score: impl FnMut(&[usize]) -> Result<f64>,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut scores = Vec::with_capacity(inits);
    for i in 0..inits {
        let km = kmeans(points, dim, k, &mut rng::stream(seed, &[TAG_O1, stage, i as u64]));
        let mut reps = nearest_unique(points, dim, &km.centroids);
        reps.sort_unstable();
        let s = score(&reps)?;
        scores.push(s);
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, reps));
        }
    }
    Ok((best.expect("inits >= 1").1, scores))
}

/// Features first (k-means over columns, `k = d_C`), then rows (k-means over
/// the feature-reduced rows, `k = n_C`), each stage keeping the best of
/// `inits` initializations by validation balanced accuracy. While the
/// feature stage runs, contexts use a fixed random `n_C`-row subset if the
/// table has more rows than that.
pub fn kmeans_reps(inputs: Inputs<'_>, inits: usize, seed: u64) -> Result<Report> {
    let train = inputs.train;
    let budget = inputs.budget;
    let (n, d) = (train.n_rows(), train.n_cols());
    let mut features: Vec<usize> = (0..d).collect();
    let mut feature_scores = Vec::new();
    if d > budget.max_features {
        let rows = subsample(n, budget.max_samples, &mut rng::stream(seed, &[TAG_O1, 2]));
        let mut columns = Vec::with_capacity(n * d);
        for j in 0..d {
            columns.extend(train.column(j));
        }
        let (best, scores) = best_reps(&columns, n, budget.max_features, inits, seed, 0, |feats| {
            val_score(inputs, &ContextSelection::new(rows.clone(), feats.to_vec())?)
        })?;
        features = best;
        feature_scores = scores;
    }
    let mut samples: Vec<usize> = (0..n).collect();
    let mut sample_scores = Vec::new();
    if n > budget.max_samples {
        let reduced = train.select_cols(&features);
        let (best, scores) = best_reps(
            reduced.values(),
            features.len(),
            budget.max_samples,
            inits,
            seed,
            1,
            |rows| val_score(inputs, &ContextSelection::new(rows.to_vec(), features.clone())?),
        )?;
        samples = best;
        sample_scores = scores;
    }
    let ctx = ContextSelection::new(samples, features)?;
    let score = test_score(inputs, &ctx)?;
    let mut report = Report::new("o1", score, ContextSize::from(&ctx), seed);
    report.details = json!({
        "inits": inits,
        "feature_stage_val_scores": feature_scores,
        "sample_stage_val_scores": sample_scores,
    });
    Ok(report)
}
