use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::table::Table;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.6,
            val_fraction: 0.2,
            test_fraction: 0.2,
            seed: 42,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let f = [self.train_fraction, self.val_fraction, self.test_fraction];
        if f.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidSpec("split fractions must be positive".into()));
        }
        if (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec("split fractions must sum to 1".into()));
        }
        Ok(())
    }
}

/// Row indices of a train/val/test partition, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

fn round_count(n: usize, fraction: f64) -> usize {
    (n as f64 * fraction).round() as usize
}

pub fn split_indices(table: &Table, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, &[0x5B17]);
    let mut out = SplitIndices {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };

    let mut assign = |mut idx: Vec<usize>, out: &mut SplitIndices, at_least_one: bool| {
        idx.shuffle(&mut rng);
        let n = idx.len();
        let floor = usize::from(at_least_one && n >= 3);
        let n_val = round_count(n, spec.val_fraction).max(floor);
        let n_test = round_count(n, spec.test_fraction).max(floor);
        let n_val = n_val.min(n);
        let n_test = n_test.min(n - n_val);
        out.val.extend_from_slice(&idx[..n_val]);
        out.test.extend_from_slice(&idx[n_val..n_val + n_test]);
        out.train.extend_from_slice(&idx[n_val + n_test..]);
    };

    if spec.stratified {
        let mut by_class = vec![Vec::new(); table.class_count()];
        for (i, &l) in table.labels().iter().enumerate() {
            by_class[l as usize].push(i);
        }
        for idx in by_class.into_iter().filter(|v| !v.is_empty()) {
            assign(idx, &mut out, true);
        }
    } else {
        assign((0..table.n_rows()).collect(), &mut out, false);
    }

    for (name, part) in [
        ("train", &mut out.train),
        ("val", &mut out.val),
        ("test", &mut out.test),
    ] {
        if part.is_empty() {
            return Err(Error::InvalidSpec(format!("{name} split would be empty")));
        }
        part.sort_unstable();
    }
    Ok(out)
}

/// Partitions `table` into (train, val, test).
pub fn split(table: &Table, spec: &SplitSpec) -> Result<(Table, Table, Table)> {
    let idx = split_indices(table, spec)?;
    Ok((
        table.select_rows(&idx.train),
        table.select_rows(&idx.val),
        table.select_rows(&idx.test),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(labels: Vec<u32>) -> Table {
        let x = (0..labels.len()).map(|i| i as f64).collect();
        Table::new(x, 1, labels, 2).unwrap()
    }

    fn spec(stratified: bool) -> SplitSpec {
        SplitSpec {
            train_fraction: 0.8,
            val_fraction: 0.1,
            test_fraction: 0.1,
            seed: 7,
            stratified,
        }
    }

    #[test]
    fn exact_fraction_sizes_and_determinism() {
        let t = table((0..100).map(|i| i % 2).collect());
        let a = split_indices(&t, &spec(false)).unwrap();
        assert_eq!((a.train.len(), a.val.len(), a.test.len()), (80, 10, 10));
        assert_eq!(a, split_indices(&t, &spec(false)).unwrap());
        let mut all: Vec<usize> = a.train.iter().chain(&a.val).chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn stratified_keeps_minority_class_everywhere() {
        // 10 rows of class 0, 90 of class 1: per class 1/1/8 and 9/9/72.
        let t = table((0..100).map(|i| u32::from(i >= 10)).collect());
        let (train, val, test) = split(&t, &spec(true)).unwrap();
        for part in [&train, &val, &test] {
            assert!(part.class_counts()[0] > 0);
        }
        assert_eq!(train.class_counts(), vec![8, 72]);
        assert_eq!(val.class_counts(), vec![1, 9]);
        assert_eq!(test.class_counts(), vec![1, 9]);
    }

    #[test]
    fn invalid_specs() {
        let t = table(vec![0, 1, 0, 1]);
        let mut s = spec(false);
        s.val_fraction = 0.0;
        assert!(split(&t, &s).is_err());
        let s = SplitSpec {
            train_fraction: 0.5,
            val_fraction: 0.4,
            test_fraction: 0.4,
            ..spec(false)
        };
        assert!(split(&t, &s).is_err());
        // Too few rows for a non-empty test split.
        let tiny = table(vec![0, 1]);
        assert!(split(&tiny, &spec(false)).is_err());
    }
}
