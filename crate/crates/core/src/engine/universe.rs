use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};
use crate::evaluator::{Budget, ContextSelection};

/// An optimizable item: a training row or a feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Item {
    Sample(usize),
    Feature(usize),
}

/// The items whose values are estimated.
///
/// Rows are optimizable only when the table has more rows than the context
/// admits, and likewise for columns. Active sample items occupy `[0, n)`;
/// active feature items follow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemUniverse {
    n: usize,
    d: usize,
    budget: Budget,
    optimize_samples: bool,
    optimize_features: bool,
}

impl ItemUniverse {
    pub fn new(n: usize, d: usize, budget: &Budget) -> Result<Self> {
        let universe = ItemUniverse {
            n,
            d,
            budget: *budget,
            optimize_samples: n > budget.max_samples,
            optimize_features: d > budget.max_features,
        };
        if universe.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "nothing to optimize: {n} rows x {d} columns fit the {} x {} context",
                budget.max_samples, budget.max_features
            )));
        }
        Ok(universe)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn optimize_samples(&self) -> bool {
        self.optimize_samples
    }

    pub fn optimize_features(&self) -> bool {
        self.optimize_features
    }

    fn sample_items(&self) -> usize {
        if self.optimize_samples {
            self.n
        } else {
            0
        }
    }

    /// Number of items `S`.
    pub fn len(&self) -> usize {
        self.sample_items() + if self.optimize_features { self.d } else { 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn item(&self, i: usize) -> Item {
        debug_assert!(i < self.len());
        if i < self.sample_items() {
            Item::Sample(i)
        } else {
            Item::Feature(i - self.sample_items())
        }
    }

    pub fn sample_item(&self, row: usize) -> Option<usize> {
        (self.optimize_samples && row < self.n).then_some(row)
    }

    pub fn feature_item(&self, col: usize) -> Option<usize> {
        (self.optimize_features && col < self.d).then(|| self.sample_items() + col)
    }

    /// Item index range of the sample kind, empty when inactive.
    pub fn sample_range(&self) -> std::ops::Range<usize> {
        0..self.sample_items()
    }

    /// Item index range of the feature kind, empty when inactive.
    pub fn feature_range(&self) -> std::ops::Range<usize> {
        self.sample_items()..self.len()
    }

    /// Rows drawn per subset: `min(n_C, n)`.
    pub fn sample_draw(&self) -> usize {
        self.budget.max_samples.min(self.n)
    }

    /// Columns drawn per subset: `min(d_C, d)`.
    pub fn feature_draw(&self) -> usize {
        self.budget.max_features.min(self.d)
    }

    /// Active items in every drawn subset.
    pub fn members_per_subset(&self) -> usize {
        let s = if self.optimize_samples {
            self.sample_draw()
        } else {
            0
        };
        let f = if self.optimize_features {
            self.feature_draw()
        } else {
            0
        };
        s + f
    }

    /// Context for a sorted list of item indices. Inactive kinds contribute
    /// every row or column.
    pub fn to_context(&self, items: &[usize]) -> Result<ContextSelection, EvalError> {
        let split = items.partition_point(|&i| i < self.sample_items());
        let samples = if self.optimize_samples {
            items[..split].to_vec()
        } else {
            (0..self.n).collect()
        };
        let features = if self.optimize_features {
            items[split..].iter().map(|&i| i - self.sample_items()).collect()
        } else {
            (0..self.d).collect()
        };
        ContextSelection::new(samples, features)
    }

    /// Item indices of the active parts of a context.
    pub fn items_of(&self, ctx: &ContextSelection) -> Vec<usize> {
        let mut items = Vec::new();
        if self.optimize_samples {
            items.extend(ctx.samples().iter().copied());
        }
        if self.optimize_features {
            items.extend(ctx.features().iter().map(|&j| self.sample_items() + j));
        }
        items
    }
}

/// Importance value per item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueVector(pub Vec<f64>);

impl ValueVector {
    /// `1/S` for every item.
    pub fn uniform(len: usize) -> Self {
        ValueVector(vec![1.0 / len as f64; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `c · φ` for a sparse membership.
    pub fn dot(&self, members: &[usize]) -> f64 {
        members.iter().map(|&i| self.0[i]).sum()
    }
}

/// One scored subset: sorted member item indices and the measured performance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetObservation {
    pub members: Vec<usize>,
    pub performance: f64,
    pub run: usize,
    pub round: usize,
    pub slot: usize,
}

impl SubsetObservation {
    pub fn new(members: Vec<usize>, performance: f64) -> Self {
        SubsetObservation {
            members,
            performance,
            run: 0,
            round: 0,
            slot: 0,
        }
    }

    /// Dense 0/1 membership vector of length `len`.
    pub fn membership(&self, len: usize) -> Vec<bool> {
        let mut bits = vec![false; len];
        for &i in &self.members {
            bits[i] = true;
        }
        bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn item_layout_with_both_kinds() {
        let u = ItemUniverse::new(10, 6, &Budget::new(4, 3).unwrap()).unwrap();
        assert_eq!(u.len(), 16);
        assert_eq!(u.item(9), Item::Sample(9));
        assert_eq!(u.item(10), Item::Feature(0));
        assert_eq!(u.feature_item(5), Some(15));
        assert_eq!(u.members_per_subset(), 7);
        let ctx = u.to_context(&[1, 4, 11, 15]).unwrap();
        assert_eq!(ctx.samples(), &[1, 4]);
        assert_eq!(ctx.features(), &[1, 5]);
        assert_eq!(u.items_of(&ctx), vec![1, 4, 11, 15]);
    }

    #[test]
    fn inactive_kind_takes_everything() {
        let u = ItemUniverse::new(10, 3, &Budget::new(4, 3).unwrap()).unwrap();
        assert_eq!(u.len(), 10);
        assert!(!u.optimize_features());
        let ctx = u.to_context(&[2, 3]).unwrap();
        assert_eq!(ctx.features(), &[0, 1, 2]);
        assert_eq!(u.feature_item(0), None);
    }

    #[test]
    fn fitting_table_has_nothing_to_optimize() {
        assert!(ItemUniverse::new(5, 3, &Budget::new(5, 3).unwrap()).is_err());
    }
}
