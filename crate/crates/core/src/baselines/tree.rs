use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{subsample, ContextSize, Inputs, Report};
use crate::data::Table;
use crate::error::Result;
use crate::evaluator::{balanced_accuracy, ContextSelection, Prediction};
use crate::rng::{self, StreamRng};

const TAG_O2: u64 = 0x61;

/// How the router picks columns when the table has more than `d_C`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// `tree` when only columns exceed the budget, `random` otherwise.
    #[default]
    Auto,
    /// A uniform random subset of `d_C` columns.
    Random,
    /// Split features of randomized information-gain trees, best of `inits`.
    Tree,
}

pub struct RouterParams {
    pub min_leaf: usize,
    pub max_depth: usize,
    pub top_splits: usize,
    pub inits: usize,
    pub feature_mode: FeatureMode,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        rows: Vec<usize>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A binary classification tree over a table's rows. Rows with
/// `x[feature] <= threshold` go left. Nodes are stored in level order.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

#[derive(Clone, Copy)]
enum Impurity {
    Gini,
    Entropy,
}

impl Impurity {
    fn of(self, counts: &[usize], total: usize) -> f64 {
        if total == 0 {
            return 0.0;
        }
        let t = total as f64;
        match self {
            Impurity::Gini => 1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>(),
            Impurity::Entropy => -counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / t;
                    p * p.log2()
                })
                .sum::<f64>(),
        }
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    /// Impurity decrease, weighted by child sizes.
    gain: f64,
}

/// Best midpoint split of `rows` on `feature`, or `None` when no threshold
/// leaves `min_leaf` rows on both sides.
fn best_split_on(
    table: &Table,
    rows: &[usize],
    feature: usize,
    min_leaf: usize,
    imp: Impurity,
) -> Option<Candidate> {
    let k = table.class_count();
    let mut order: Vec<(f64, u32)> = rows
        .iter()
        .map(|&r| (table.get(r, feature), table.label(r)))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = order.len();
    let mut right = vec![0usize; k];
    for &(_, y) in &order {
        right[y as usize] += 1;
    }
    let parent = imp.of(&right, n);
    let mut left = vec![0usize; k];
    let mut best: Option<Candidate> = None;
    for i in 1..n {
        let y = order[i - 1].1 as usize;
        left[y] += 1;
        right[y] -= 1;
        if order[i - 1].0 == order[i].0 || i < min_leaf || n - i < min_leaf {
            continue;
        }
        let child = (i as f64 * imp.of(&left, i) + (n - i) as f64 * imp.of(&right, n - i)) / n as f64;
        let gain = parent - child;
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            best = Some(Candidate {
                feature,
                threshold: 0.5 * (order[i - 1].0 + order[i].0),
                gain,
            });
        }
    }
    best
}

fn is_pure(table: &Table, rows: &[usize]) -> bool {
    rows.windows(2).all(|w| table.label(w[0]) == table.label(w[1]))
}

impl DecisionTree {
    fn grow(
        table: &Table,
        rows: Vec<usize>,
        max_depth: usize,
        mut choose: impl FnMut(&[usize]) -> Option<Candidate>,
    ) -> Self {
        let mut nodes = vec![Node::Leaf { rows: Vec::new() }];
        let mut queue = VecDeque::from([(0usize, rows, 0usize)]);
        while let Some((id, rows, depth)) = queue.pop_front() {
            let split = if depth < max_depth && !is_pure(table, &rows) {
                choose(&rows)
            } else {
                None
            };
            match split {
                Some(c) => {
                    let (l, r): (Vec<usize>, Vec<usize>) = rows
                        .iter()
                        .partition(|&&row| table.get(row, c.feature) <= c.threshold);
                    let (left, right) = (nodes.len(), nodes.len() + 1);
                    nodes.push(Node::Leaf { rows: Vec::new() });
                    nodes.push(Node::Leaf { rows: Vec::new() });
                    nodes[id] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left,
                        right,
                    };
                    queue.push_back((left, l, depth + 1));
                    queue.push_back((right, r, depth + 1));
                }
                None => nodes[id] = Node::Leaf { rows },
            }
        }
        DecisionTree { nodes }
    }

    /// CART with Gini impurity and deterministic best splits over
    /// `features`: every impure node with a split leaving `min_leaf` rows per
    /// side is split. Ties go to the lower feature index, then the lower
    /// threshold.
    pub fn fit_gini(table: &Table, features: &[usize], min_leaf: usize) -> Self {
        let min_leaf = min_leaf.max(1);
        DecisionTree::grow(table, (0..table.n_rows()).collect(), usize::MAX, |rows| {
            let mut best: Option<Candidate> = None;
            for &f in features {
                if let Some(c) = best_split_on(table, rows, f, min_leaf, Impurity::Gini) {
                    if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                        best = Some(c);
                    }
                }
            }
            best
        })
    }

    /// At every node, ranks `features` by their best information gain and
    /// splits on one drawn uniformly from the top `top_splits`.
    pub fn fit_random_gain(
        table: &Table,
        features: &[usize],
        max_depth: usize,
        top_splits: usize,
        rng: &mut StreamRng,
    ) -> Self {
        DecisionTree::grow(table, (0..table.n_rows()).collect(), max_depth, |rows| {
            let mut cands: Vec<Candidate> = features
                .iter()
                .filter_map(|&f| best_split_on(table, rows, f, 1, Impurity::Entropy))
                .collect();
            if cands.is_empty() {
                return None;
            }
            cands.sort_by(|a, b| b.gain.total_cmp(&a.gain).then(a.feature.cmp(&b.feature)));
            cands.truncate(top_splits.max(1));
            let pick = rng.random_range(0..cands.len());
            Some(cands.swap_remove(pick))
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Node index of the leaf that `x` reaches.
    pub fn route(&self, x: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { .. } => return id,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Training rows of a leaf, in ascending order.
    pub fn leaf_rows(&self, id: usize) -> &[usize] {
        match &self.nodes[id] {
            Node::Leaf { rows } => rows,
            Node::Split { .. } => &[],
        }
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| matches!(self.nodes[i], Node::Leaf { .. }))
            .collect()
    }

    /// Distinct split features in level order, at most `limit`.
    pub fn split_features(&self, limit: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for node in &self.nodes {
            if let Node::Split { feature, .. } = node {
                if out.len() < limit && !out.contains(feature) {
                    out.push(*feature);
                }
            }
        }
        out
    }
}

/// Column subset from the best of `inits` randomized information-gain trees
/// by `score`. A tree without splits contributes a random subset instead.
pub fn feature_tree(
    train: &Table,
    limit: usize,
    max_depth: usize,
    top_splits: usize,
    inits: usize,
    seed: u64,
    mut score: impl FnMut(&[usize]) -> Result<f64>,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let all: Vec<usize> = (0..train.n_cols()).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut scores = Vec::with_capacity(inits);
    for i in 0..inits {
        let mut r = rng::stream(seed, &[TAG_O2, 1, i as u64]);
        let tree = DecisionTree::fit_random_gain(train, &all, max_depth, top_splits, &mut r);
        let mut feats = tree.split_features(limit);
        if feats.is_empty() {
            feats = subsample(train.n_cols(), limit, &mut r);
        }
        feats.sort_unstable();
        let s = score(&feats)?;
        scores.push(s);
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, feats));
        }
    }
    Ok((best.expect("inits >= 1").1, scores))
}

/// Routes each query row to its leaf and predicts it with that leaf's
/// training rows (the first `max_samples` of them) as context.
fn routed_prediction(
    inputs: Inputs<'_>,
    tree: &DecisionTree,
    features: &[usize],
    query: &Table,
) -> Result<Prediction> {
    let k = inputs.train.class_count();
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for q in 0..query.n_rows() {
        let leaf = tree.route(query.row(q));
        match groups.iter_mut().find(|(l, _)| *l == leaf) {
            Some((_, rows)) => rows.push(q),
            None => groups.push((leaf, vec![q])),
        }
    }
    let mut proba = vec![0.0; query.n_rows() * k];
    for (leaf, queries) in groups {
        let rows = tree.leaf_rows(leaf);
        let rows = rows[..rows.len().min(inputs.budget.max_samples)].to_vec();
        let ctx = ContextSelection::new(rows, features.to_vec())?;
        let pred = inputs
            .evaluator
            .score_context(inputs.train, &ctx, &query.select_rows(&queries))?;
        for (i, &q) in queries.iter().enumerate() {
            proba[q * k..(q + 1) * k].copy_from_slice(pred.row(i));
        }
    }
    Ok(Prediction::from_flat(proba, k)?)
}

fn router(inputs: Inputs<'_>, features: &[usize], min_leaf: usize) -> DecisionTree {
    if inputs.train.n_rows() > inputs.budget.max_samples {
        DecisionTree::fit_gini(inputs.train, features, min_leaf)
    } else {
        DecisionTree {
            nodes: vec![Node::Leaf {
                rows: (0..inputs.train.n_rows()).collect(),
            }],
        }
    }
}

fn routed_score(inputs: Inputs<'_>, features: &[usize], min_leaf: usize, query: &Table) -> Result<f64> {
    let tree = router(inputs, features, min_leaf);
    let pred = routed_prediction(inputs, &tree, features, query)?;
    Ok(balanced_accuracy(&pred, query.labels())?)
}

pub fn dt_router(inputs: Inputs<'_>, params: &RouterParams, seed: u64) -> Result<Report> {
    let train = inputs.train;
    let budget = inputs.budget;
    let (n, d) = (train.n_rows(), train.n_cols());
    let mode = match params.feature_mode {
        _ if d <= budget.max_features => None,
        FeatureMode::Auto if n <= budget.max_samples => Some(FeatureMode::Tree),
        FeatureMode::Auto => Some(FeatureMode::Random),
        m => Some(m),
    };
    let mut val_scores = Vec::new();
    let features = match mode {
        None => (0..d).collect(),
        Some(FeatureMode::Tree) => {
            let (feats, scores) = feature_tree(
                train,
                budget.max_features,
                params.max_depth,
                params.top_splits,
                params.inits,
                seed,
                |f| routed_score(inputs, f, params.min_leaf, inputs.val),
            )?;
            val_scores = scores;
            feats
        }
        Some(_) => subsample(d, budget.max_features, &mut rng::stream(seed, &[TAG_O2, 0])),
    };
    let tree = router(inputs, &features, params.min_leaf);
    let pred = routed_prediction(inputs, &tree, &features, inputs.test)?;
    let score = balanced_accuracy(&pred, inputs.test.labels())?;
    let leaf_sizes: Vec<usize> = tree
        .leaves()
        .iter()
        .map(|&l| tree.leaf_rows(l).len().min(budget.max_samples))
        .collect();
    let context_size = ContextSize {
        samples: leaf_sizes.iter().copied().max().unwrap_or(0),
        features: features.len(),
    };
    let mut report = Report::new("o2", score, context_size, seed);
    report.details = json!({
        "feature_mode": match mode {
            None => "all",
            Some(FeatureMode::Tree) => "tree",
            Some(_) => "random",
        },
        "leaves": leaf_sizes.len(),
        "leaf_context_sizes": leaf_sizes,
        "min_leaf": params.min_leaf,
        "feature_tree_val_scores": val_scores,
    });
    Ok(report)
}
