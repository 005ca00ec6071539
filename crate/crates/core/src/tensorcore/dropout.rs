//! Inverted dropout masks for dense activations.

use rand::Rng;

use crate::error::{Error, Result};

/// A sampled dropout mask over a flat activation vector.
///
/// `drop_probability` is the probability that a unit is dropped. Kept units
/// are scaled by `1 / (1 - p)` at training time (inverted dropout), so
/// inference runs the full network with no rescaling.
#[derive(Debug, Clone)]
pub struct DropoutMask {
    keep: Vec<bool>,
    drop_probability: f64,
}

impl DropoutMask {
    /// Samples a mask of the given width. `p` must lie in `[0, 1)`; `p = 0`
    /// keeps everything.
    pub fn sample<R: Rng>(width: usize, drop_probability: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..1.0).contains(&drop_probability) {
            return Err(Error::validation(format!(
                "drop probability must be in [0, 1), got {drop_probability}"
            )));
        }
        let keep = (0..width)
            .map(|_| rng.gen::<f64>() >= drop_probability)
            .collect();
        Ok(DropoutMask {
            keep,
            drop_probability,
        })
    }

    /// A mask that keeps every unit (used wherever dropout is disabled).
    pub fn all_keep(width: usize) -> Self {
        DropoutMask {
            keep: vec![true; width],
            drop_probability: 0.0,
        }
    }

    pub fn width(&self) -> usize {
        self.keep.len()
    }

    pub fn drop_probability(&self) -> f64 {
        self.drop_probability
    }

    /// The train-time compensation factor `1 / (1 - p)`.
    pub fn scale(&self) -> f64 {
        1.0 / (1.0 - self.drop_probability)
    }

    pub fn kept_fraction(&self) -> f64 {
        if self.keep.is_empty() {
            return 1.0;
        }
        self.keep.iter().filter(|&&k| k).count() as f64 / self.keep.len() as f64
    }

    /// Applies the mask in place: dropped units become zero, kept units are
    /// scaled by `1 / (1 - p)`. The same routing applies to activations on
    /// the forward pass and to their gradients on the backward pass.
    pub fn apply(&self, values: &mut [f64]) -> Result<()> {
        if values.len() != self.keep.len() {
            return Err(Error::dimension(format!(
                "dropout mask width {} does not match buffer width {}",
                self.keep.len(),
                values.len()
            )));
        }
        let scale = self.scale();
        for (v, &k) in values.iter_mut().zip(&self.keep) {
            if k {
                *v *= scale;
            } else {
                *v = 0.0;
            }
        }
        Ok(())
    }
}
