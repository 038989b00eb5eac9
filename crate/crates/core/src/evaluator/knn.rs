use super::{check_query, Budget, ContextSelection, Evaluator, Prediction};
use crate::data::Table;
use crate::error::{EvalError, Result};

/// Distance-weighted k-nearest-neighbour vote over the context.
///
/// Distances are Euclidean on the context's feature subset and each neighbour
/// votes with weight `1 / (dist + 1e-9)`. Equidistant neighbours are ordered
/// by training row index, so the result does not depend on the order of the
/// context's sample list.
#[derive(Debug, Clone)]
pub struct KnnSurrogate {
    k: usize,
    capacity: Option<Budget>,
}

impl KnnSurrogate {
    pub fn new(k: usize, capacity: Option<Budget>) -> Result<Self> {
        if k == 0 {
            return Err(crate::Error::InvalidSpec("knn needs k >= 1".into()));
        }
        Ok(KnnSurrogate { k, capacity })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Evaluator for KnnSurrogate {
    fn score_context(
        &self,
        train: &Table,
        ctx: &ContextSelection,
        query: &Table,
    ) -> Result<Prediction, EvalError> {
        check_query(train, ctx, query)?;
        if let Some(cap) = self.capacity {
            if !cap.admits(ctx) {
                return Err(EvalError::CapacityExceeded {
                    samples: ctx.n_samples(),
                    features: ctx.n_features(),
                    limit: Some(cap),
                });
            }
        }
        let feats = ctx.features();
        let f = feats.len();
        let samples = ctx.samples();
        let mut points = Vec::with_capacity(samples.len() * f);
        for &s in samples {
            let row = train.row(s);
            points.extend(feats.iter().map(|&j| row[j]));
        }
        let k = self.k.min(samples.len());
        let n_classes = train.class_count();
        let mut proba = vec![0.0; query.n_rows() * n_classes];
        let mut q = vec![0.0; f];
        // (squared distance, position in `samples`), kept sorted ascending.
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);

        for (qi, out) in proba.chunks_mut(n_classes).enumerate() {
            let qrow = query.row(qi);
            for (slot, &j) in q.iter_mut().zip(feats) {
                *slot = qrow[j];
            }
            best.clear();
            for (pos, p) in points.chunks_exact(f).enumerate() {
                let dist: f64 = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
                // Positions follow sorted training indices, so ties resolve by row index.
                if best.len() == k && dist >= best[k - 1].0 {
                    continue;
                }
                let at = best.partition_point(|&(d, _)| d <= dist);
                best.insert(at, (dist, pos));
                best.truncate(k);
            }
            let mut total = 0.0;
            for &(d2, pos) in &best {
                let w = 1.0 / (d2.sqrt() + 1e-9);
                out[train.label(samples[pos]) as usize] += w;
                total += w;
            }
            out.iter_mut().for_each(|v| *v /= total);
        }
        Prediction::from_flat(proba, n_classes)
    }

    fn name(&self) -> String {
        format!("knn(k={})", self.k)
    }
}
