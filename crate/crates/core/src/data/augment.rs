//! Sample mixup and random-projection feature augmentation.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::table::{Origin, Table};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentKind {
    SampleAffine,
    FeatureProjection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub kind: AugmentKind,
    /// Row count after sample augmentation.
    #[serde(default)]
    pub target_n: Option<usize>,
    /// Column count after feature augmentation.
    #[serde(default)]
    pub target_d: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl AugmentSpec {
    pub fn samples(target_n: usize, seed: u64) -> Self {
        AugmentSpec {
            kind: AugmentKind::SampleAffine,
            target_n: Some(target_n),
            target_d: None,
            seed,
        }
    }

    pub fn features(target_d: usize, seed: u64) -> Self {
        AugmentSpec {
            kind: AugmentKind::FeatureProjection,
            target_n: None,
            target_d: Some(target_d),
            seed,
        }
    }
}

/// `alpha * xk + (1 - alpha) * xl`.
pub fn mixup_row(xk: &[f64], xl: &[f64], alpha: f64) -> Vec<f64> {
    xk.iter()
        .zip(xl)
        .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
        .collect()
}

/// The mixed row takes the first parent's label when `alpha <= 0.5`.
pub fn mixup_label(yk: u32, yl: u32, alpha: f64) -> u32 {
    if alpha <= 0.5 {
        yk
    } else {
        yl
    }
}

/// One mixup draw: two distinct parent rows and a coefficient in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixupDraw {
    pub k: usize,
    pub l: usize,
    pub alpha: f64,
}

/// Draws the parents and coefficient of one mixed row from an `n`-row table.
pub fn draw_mixup(n: usize, rng: &mut StreamRng) -> MixupDraw {
    let k = rng.random_range(0..n);
    let mut l = rng.random_range(0..n - 1);
    if l >= k {
        l += 1;
    }
    let alpha: f64 = rng.sample(Open01);
    MixupDraw { k, l, alpha }
}

/// The generator used by [`augment_samples`], exposed so callers can replay
/// the draws behind each appended row.
pub fn mixup_stream(seed: u64) -> StreamRng {
    rng::stream(seed, &[0xA06])
}

pub fn augment_samples(table: &Table, spec: &AugmentSpec) -> Result<Table> {
    if spec.kind != AugmentKind::SampleAffine {
        return Err(Error::InvalidSpec(
            "augment_samples needs kind sample_affine".into(),
        ));
    }
    let n = table.n_rows();
    let target = spec
        .target_n
        .ok_or_else(|| Error::InvalidSpec("sample_affine needs target_n".into()))?;
    if n < 2 {
        return Err(Error::Degenerate("mixup needs at least two rows".into()));
    }
    if target <= n {
        return Err(Error::InvalidSpec(format!(
            "target_n {target} must exceed n = {n}"
        )));
    }
    let mut rng = mixup_stream(spec.seed);
    let extra = target - n;
    let mut rows = Vec::with_capacity(extra * table.n_cols());
    let mut labels = Vec::with_capacity(extra);
    for _ in 0..extra {
        let MixupDraw { k, l, alpha } = draw_mixup(n, &mut rng);
        rows.extend(mixup_row(table.row(k), table.row(l), alpha));
        labels.push(mixup_label(table.label(k), table.label(l), alpha));
    }
    table.append_rows(rows, labels, Origin::Augmented)
}

/// Random projection matrix (`d x extra`, row-major) with entries drawn from
/// N(0, 1/extra).
pub fn projection_matrix(d: usize, extra: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, &[0xF0]);
    let normal = Normal::new(0.0, (1.0 / extra as f64).sqrt()).expect("positive variance");
    (0..d * extra).map(|_| normal.sample(&mut rng)).collect()
}

/// Appends the columns of `X · R` for a row-major `d x extra` matrix `R`.
pub fn append_projection(table: &Table, projection: &[f64], extra: usize) -> Result<Table> {
    let d = table.n_cols();
    if projection.len() != d * extra {
        return Err(Error::InvalidSpec(format!(
            "projection has {} entries, expected {d} x {extra}",
            projection.len()
        )));
    }
    let mut columns = vec![vec![0.0; table.n_rows()]; extra];
    for i in 0..table.n_rows() {
        let row = table.row(i);
        for (c, col) in columns.iter_mut().enumerate() {
            col[i] = row
                .iter()
                .enumerate()
                .map(|(j, v)| v * projection[j * extra + c])
                .sum();
        }
    }
    table.append_columns(columns, Origin::Augmented, "proj_")
}

pub fn augment_features(table: &Table, spec: &AugmentSpec) -> Result<Table> {
    if spec.kind != AugmentKind::FeatureProjection {
        return Err(Error::InvalidSpec(
            "augment_features needs kind feature_projection".into(),
        ));
    }
    let d = table.n_cols();
    let target = spec
        .target_d
        .ok_or_else(|| Error::InvalidSpec("feature_projection needs target_d".into()))?;
    if target <= d {
        return Err(Error::InvalidSpec(format!(
            "target_d {target} must exceed d = {d}"
        )));
    }
    let extra = target - d;
    append_projection(table, &projection_matrix(d, extra, spec.seed), extra)
}

/// Dispatches on `spec.kind`.
pub fn augment(table: &Table, spec: &AugmentSpec) -> Result<Table> {
    match spec.kind {
        AugmentKind::SampleAffine => augment_samples(table, spec),
        AugmentKind::FeatureProjection => augment_features(table, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_rows() -> Table {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, (i * i) as f64]).collect();
        Table::from_rows(&rows, vec![0, 1, 0, 1, 1], 2).unwrap()
    }

    #[test]
    fn mixup_arithmetic() {
        assert_eq!(mixup_row(&[0.0, 0.0], &[2.0, 2.0], 0.25), vec![1.5, 1.5]);
        assert_eq!(mixup_label(3, 4, 0.25), 3);
        assert_eq!(mixup_label(3, 4, 0.5), 3);
        assert_eq!(mixup_label(3, 4, 0.51), 4);
        let xk = [0.1, -7.3, 1e9];
        assert_eq!(mixup_row(&xk, &[5.0, 5.0, 5.0], 1.0), xk.to_vec());
    }

    #[test]
    fn sample_augmentation_is_append_only() {
        let t = five_rows();
        let a = augment_samples(&t, &AugmentSpec::samples(8, 1)).unwrap();
        assert_eq!(a.n_rows(), 8);
        assert_eq!(&a.values()[..10], t.values());
        assert_eq!(&a.labels()[..5], t.labels());
        assert_eq!(a.row_origins().iter().filter(|o| o.is_synthetic()).count(), 3);
        assert!(a.row_origins()[..5].iter().all(|o| !o.is_synthetic()));
    }

    #[test]
    fn sample_augmentation_replays_from_stream() {
        let t = five_rows();
        let a = augment_samples(&t, &AugmentSpec::samples(40, 9)).unwrap();
        let mut rng = mixup_stream(9);
        for i in 5..40 {
            let MixupDraw { k, l, alpha } = draw_mixup(5, &mut rng);
            assert_ne!(k, l);
            assert!(alpha > 0.0 && alpha < 1.0);
            assert_eq!(a.row(i), mixup_row(t.row(k), t.row(l), alpha).as_slice());
            let expected = if alpha <= 0.5 { t.label(k) } else { t.label(l) };
            assert_eq!(a.label(i), expected);
        }
    }

    #[test]
    fn augmentation_errors() {
        let one = Table::from_rows(&[vec![1.0]], vec![0], 2).unwrap();
        assert!(augment_samples(&one, &AugmentSpec::samples(3, 0)).is_err());
        assert!(augment_samples(&five_rows(), &AugmentSpec::samples(5, 0)).is_err());
        assert!(augment_features(&five_rows(), &AugmentSpec::features(2, 0)).is_err());
        assert!(augment_samples(&five_rows(), &AugmentSpec::features(9, 0)).is_err());
    }

    #[test]
    fn unit_projection_copies_feature() {
        let t = Table::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![0, 1], 2).unwrap();
        let a = append_projection(&t, &[1.0, 0.0], 1).unwrap();
        assert_eq!(a.n_cols(), 3);
        assert_eq!(a.column(2), a.column(0));
        assert_eq!(a.col_origins()[2], Origin::Augmented);
    }

    #[test]
    fn feature_augmentation_appends_requested_count() {
        let a = augment_features(&five_rows(), &AugmentSpec::features(3, 4)).unwrap();
        assert_eq!(a.n_cols(), 3);
        assert_eq!(a.column(0), five_rows().column(0));
        assert_eq!(a.column(1), five_rows().column(1));
    }
}
