//! Training loss: sum over targets of the per-target batch RMSE.

use crate::error::{Error, Result};

fn check_batch(predictions: &[Vec<f64>], references: &[Vec<f64>]) -> Result<usize> {
    if predictions.is_empty() {
        return Err(Error::validation("loss needs at least one sample"));
    }
    if predictions.len() != references.len() {
        return Err(Error::dimension(format!(
            "{} predictions vs {} references",
            predictions.len(),
            references.len()
        )));
    }
    let width = predictions[0].len();
    if width == 0 {
        return Err(Error::validation("loss needs at least one target"));
    }
    for (p, r) in predictions.iter().zip(references) {
        if p.len() != width || r.len() != width {
            return Err(Error::dimension("ragged loss batch"));
        }
    }
    Ok(width)
}

/// Per-target root-mean-square errors over the batch.
pub fn per_target_rmse(predictions: &[Vec<f64>], references: &[Vec<f64>]) -> Result<Vec<f64>> {
    let width = check_batch(predictions, references)?;
    let batch = predictions.len() as f64;
    let mut out = vec![0.0; width];
    for (p, r) in predictions.iter().zip(references) {
        for i in 0..width {
            let d = p[i] - r[i];
            out[i] += d * d;
        }
    }
    for v in out.iter_mut() {
        *v = (*v / batch).sqrt();
    }
    Ok(out)
}

/// Scalar loss: the per-target RMSEs summed.
pub fn loss_sum_rmse(predictions: &[Vec<f64>], references: &[Vec<f64>]) -> Result<f64> {
    Ok(per_target_rmse(predictions, references)?.iter().sum())
}

/// Gradient of [`loss_sum_rmse`] with respect to each prediction. A target
/// whose batch RMSE is exactly zero contributes no gradient (the loss is
/// not differentiable there; zero is the only useful choice).
pub fn loss_backward(predictions: &[Vec<f64>], references: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let width = check_batch(predictions, references)?;
    let rmse = per_target_rmse(predictions, references)?;
    let batch = predictions.len() as f64;
    let mut grads = Vec::with_capacity(predictions.len());
    for (p, r) in predictions.iter().zip(references) {
        let mut g = vec![0.0; width];
        for i in 0..width {
            if rmse[i] > 0.0 {
                g[i] = (p[i] - r[i]) / (batch * rmse[i]);
            }
        }
        grads.push(g);
    }
    Ok(grads)
}
