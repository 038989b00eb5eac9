//! Drop-and-inject noising of samples or features.
//!
//! Sample kinds drop a fraction of rows and append the same number of
//! synthetic rows; feature kinds do the same with columns. Every injected
//! row or column is tagged [`Origin::Injected`].

use nalgebra::{DMatrix, DVector};
use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::table::{Origin, Table};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Rows whose features are drawn independently from each column's
    /// empirical marginal.
    S1Marginal,
    /// Rows drawn from one Gaussian fitted to all surviving rows.
    S2Gaussian,
    /// Copy of a surviving column plus Gaussian noise of three times its variance.
    F1Jitter,
    /// Copy of a surviving column with its values permuted.
    F2Permute,
    /// F1 or F2, chosen per injected column by a fair coin.
    FMixed,
}

impl NoiseKind {
    pub fn is_sample_kind(self) -> bool {
        matches!(self, NoiseKind::S1Marginal | NoiseKind::S2Gaussian)
    }
}

fn default_drop_fraction() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(default = "default_drop_fraction")]
    pub drop_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, seed: u64) -> Self {
        NoiseSpec {
            kind,
            drop_fraction: default_drop_fraction(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.drop_fraction > 0.0 && self.drop_fraction < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "drop_fraction {} outside (0, 1)",
                self.drop_fraction
            )));
        }
        Ok(())
    }
}

pub fn inject_noise(table: &Table, spec: &NoiseSpec) -> Result<Table> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, &[0x401, spec.kind as u64]);
    if spec.kind.is_sample_kind() {
        inject_rows(table, spec, &mut rng)
    } else {
        inject_columns(table, spec, &mut rng)
    }
}

fn surviving(total: usize, drop: usize, rng: &mut StreamRng) -> Vec<usize> {
    let dropped = index::sample(rng, total, drop).into_vec();
    let mut keep = vec![true; total];
    for i in dropped {
        keep[i] = false;
    }
    (0..total).filter(|&i| keep[i]).collect()
}

fn inject_rows(table: &Table, spec: &NoiseSpec, rng: &mut StreamRng) -> Result<Table> {
    let n = table.n_rows();
    let d = table.n_cols();
    if n < 2 {
        return Err(Error::Degenerate("sample noising needs at least two rows".into()));
    }
    let drop = (spec.drop_fraction * n as f64).floor() as usize;
    let keep = surviving(n, drop, rng);
    let base = table.select_rows(&keep);

    let mut rows = Vec::with_capacity(drop * d);
    match spec.kind {
        NoiseKind::S1Marginal => {
            let columns: Vec<Vec<f64>> = (0..d).map(|j| base.column(j)).collect();
            for _ in 0..drop {
                rows.extend(columns.iter().map(|c| *c.choose(rng).expect("non-empty")));
            }
        }
        NoiseKind::S2Gaussian => {
            let sampler = GaussianSampler::fit(&base)?;
            for _ in 0..drop {
                rows.extend(sampler.sample(rng));
            }
        }
        _ => unreachable!("feature kind routed to inject_rows"),
    }
    // Labels follow the empirical distribution of the survivors.
    let labels = (0..drop)
        .map(|_| *base.labels().choose(rng).expect("non-empty"))
        .collect();
    base.append_rows(rows, labels, Origin::Injected)
}

struct GaussianSampler {
    mean: DVector<f64>,
    chol: DMatrix<f64>,
}

impl GaussianSampler {
    fn fit(table: &Table) -> Result<Self> {
        let n = table.n_rows();
        let d = table.n_cols();
        if n < 2 {
            return Err(Error::Degenerate(format!(
                "covariance needs at least two surviving rows, have {n}"
            )));
        }
        let data = DMatrix::from_row_slice(n, d, table.values());
        let mean = data.row_mean().transpose();
        let mut centered = data;
        for mut row in centered.row_iter_mut() {
            row -= mean.transpose();
        }
        let mut cov = centered.transpose() * &centered / (n as f64 - 1.0);
        let ridge = 1e-6 * cov.trace() / d as f64;
        // A zero-variance table still needs a positive-definite matrix.
        let ridge = if ridge > 0.0 { ridge } else { 1e-12 };
        for i in 0..d {
            cov[(i, i)] += ridge;
        }
        let chol = cov
            .cholesky()
            .ok_or_else(|| Error::Degenerate("covariance is not positive definite".into()))?
            .l();
        Ok(GaussianSampler { mean, chol })
    }

    fn sample(&self, rng: &mut StreamRng) -> Vec<f64> {
        let z = DVector::from_fn(self.mean.len(), |_, _| StandardNormal.sample(rng));
        (&self.mean + &self.chol * z).iter().copied().collect()
    }
}

fn sample_variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

fn inject_columns(table: &Table, spec: &NoiseSpec, rng: &mut StreamRng) -> Result<Table> {
    let d = table.n_cols();
    if d < 2 {
        return Err(Error::Degenerate(
            "feature noising needs at least two columns".into(),
        ));
    }
    if table.n_rows() < 2 {
        return Err(Error::Degenerate(
            "feature noising needs at least two rows".into(),
        ));
    }
    let drop = (spec.drop_fraction * d as f64).floor() as usize;
    let keep = surviving(d, drop, rng);
    let base = table.select_cols(&keep);

    let mut columns = Vec::with_capacity(drop);
    for _ in 0..drop {
        let source = base.column(rng.random_range(0..base.n_cols()));
        let kind = match spec.kind {
            NoiseKind::FMixed if rng.random_bool(0.5) => NoiseKind::F1Jitter,
            NoiseKind::FMixed => NoiseKind::F2Permute,
            k => k,
        };
        let col = match kind {
            NoiseKind::F1Jitter => {
                let sd = (3.0 * sample_variance(&source)).sqrt();
                if sd > 0.0 {
                    let noise = Normal::new(0.0, sd).expect("finite sd");
                    source.iter().map(|v| v + noise.sample(rng)).collect()
                } else {
                    source
                }
            }
            NoiseKind::F2Permute => {
                let mut c = source;
                c.shuffle(rng);
                c
            }
            _ => unreachable!("sample kind routed to inject_columns"),
        };
        columns.push(col);
    }
    base.append_columns(columns, Origin::Injected, "noise_")
}
