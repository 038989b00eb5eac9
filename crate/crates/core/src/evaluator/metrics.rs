use serde::{Deserialize, Serialize};

use super::Prediction;
use crate::error::EvalError;

/// Performance metric used to score a context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    #[serde(alias = "bacc")]
    BalancedAccuracy,
    Auroc,
}

impl Metric {
    pub fn evaluate(self, pred: &Prediction, truth: &[u32]) -> Result<f64, EvalError> {
        match self {
            Metric::BalancedAccuracy => balanced_accuracy(pred, truth),
            Metric::Auroc => auroc(pred, truth),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bacc" | "balanced_accuracy" => Ok(Metric::BalancedAccuracy),
            "auroc" => Ok(Metric::Auroc),
            other => Err(format!("unknown metric '{other}' (expected bacc or auroc)")),
        }
    }
}

fn check_shape(pred: &Prediction, truth: &[u32]) -> Result<(), EvalError> {
    if truth.is_empty() {
        return Err(EvalError::Metric("empty truth vector".into()));
    }
    if pred.n_rows() != truth.len() {
        return Err(EvalError::Metric(format!(
            "{} prediction rows for {} labels",
            pred.n_rows(),
            truth.len()
        )));
    }
    if let Some(&bad) = truth.iter().find(|&&t| t as usize >= pred.n_classes()) {
        return Err(EvalError::Metric(format!(
            "label {bad} has no probability column"
        )));
    }
    Ok(())
}

/// Mean per-class recall over the classes present in `truth`. Argmax ties go
/// to the lowest class index.
pub fn balanced_accuracy(pred: &Prediction, truth: &[u32]) -> Result<f64, EvalError> {
    check_shape(pred, truth)?;
    let k = pred.n_classes();
    let mut total = vec![0usize; k];
    let mut hit = vec![0usize; k];
    for (i, &t) in truth.iter().enumerate() {
        total[t as usize] += 1;
        if pred.argmax(i) == t as usize {
            hit[t as usize] += 1;
        }
    }
    let present: Vec<f64> = (0..k)
        .filter(|&c| total[c] > 0)
        .map(|c| hit[c] as f64 / total[c] as f64)
        .collect();
    Ok(present.iter().sum::<f64>() / present.len() as f64)
}

/// Midranks (1-based) of `scores`.
pub(crate) fn midranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Rank statistic for one positive class against the rest.
fn binary_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let ranks = midranks(scores);
    let n_pos = positive.iter().filter(|&&p| p).count() as f64;
    let n_neg = scores.len() as f64 - n_pos;
    let rank_sum: f64 = ranks
        .iter()
        .zip(positive)
        .filter(|(_, &p)| p)
        .map(|(r, _)| r)
        .sum();
    (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg)
}

/// Area under the ROC curve. Two-class predictions use the class-1 column;
/// wider predictions average one-vs-rest AUCs over the classes in `truth`.
pub fn auroc(pred: &Prediction, truth: &[u32]) -> Result<f64, EvalError> {
    check_shape(pred, truth)?;
    let k = pred.n_classes();
    let mut present = vec![false; k];
    for &t in truth {
        present[t as usize] = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(EvalError::Metric(
            "AUROC needs at least two classes in truth".into(),
        ));
    }
    let column = |c: usize| -> Vec<f64> { (0..pred.n_rows()).map(|i| pred.row(i)[c]).collect() };
    if k == 2 {
        let positive: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
        return Ok(binary_auc(&column(1), &positive));
    }
    let aucs: Vec<f64> = (0..k)
        .filter(|&c| present[c])
        .map(|c| {
            let positive: Vec<bool> = truth.iter().map(|&t| t as usize == c).collect();
            binary_auc(&column(c), &positive)
        })
        .collect();
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}
