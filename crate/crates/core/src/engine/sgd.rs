//! One mini-batch gradient step on the unweighted least-squares loss
//! `(c·φ + φ0 - p)^2`, averaged over the batch.

use super::universe::{SubsetObservation, ValueVector};

fn residual(phi: &[f64], intercept: Option<f64>, obs: &SubsetObservation) -> f64 {
    obs.members.iter().map(|&i| phi[i]).sum::<f64>() + intercept.unwrap_or(0.0) - obs.performance
}

/// Mean squared residual over `batch`.
pub fn batch_loss(phi: &[f64], intercept: Option<f64>, batch: &[SubsetObservation]) -> f64 {
    assert!(!batch.is_empty(), "empty batch");
    batch
        .iter()
        .map(|o| residual(phi, intercept, o).powi(2))
        .sum::<f64>()
        / batch.len() as f64
}

/// Gradient of [`batch_loss`] with respect to `φ` and, when present, the
/// intercept.
pub fn batch_gradient(
    phi: &[f64],
    intercept: Option<f64>,
    batch: &[SubsetObservation],
) -> (Vec<f64>, Option<f64>) {
    assert!(!batch.is_empty(), "empty batch");
    let scale = 2.0 / batch.len() as f64;
    let mut grad = vec![0.0; phi.len()];
    let mut grad0 = 0.0;
    for obs in batch {
        let r = scale * residual(phi, intercept, obs);
        for &i in &obs.members {
            grad[i] += r;
        }
        grad0 += r;
    }
    (grad, intercept.map(|_| grad0))
}

/// Applies one step in place. All residuals are computed at the current
/// point before anything moves.
pub fn sgd_step_in_place(phi: &mut [f64], intercept: &mut Option<f64>, batch: &[SubsetObservation], lr: f64) {
    let (grad, grad0) = batch_gradient(phi, *intercept, batch);
    for (p, g) in phi.iter_mut().zip(&grad) {
        *p -= lr * g;
    }
    if let (Some(b), Some(g)) = (intercept.as_mut(), grad0) {
        *b -= lr * g;
    }
}

pub fn sgd_step(
    phi: &ValueVector,
    batch: &[SubsetObservation],
    lr: f64,
    intercept: Option<f64>,
) -> (ValueVector, Option<f64>) {
    let mut next = phi.clone();
    let mut b = intercept;
    sgd_step_in_place(&mut next.0, &mut b, batch, lr);
    (next, b)
}
