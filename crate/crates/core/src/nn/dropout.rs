use ndarray::Array2;
use rand::Rng;

/// Inverted dropout mask: kept entries are scaled by `1 / keep_prob` so the
/// expected activation is unchanged and inference needs no rescaling.
#[derive(Debug, Clone)]
pub struct DropoutMask {
    scale: Array2<f64>,
}

impl DropoutMask {
    /// `None` when `keep_prob >= 1`, meaning dropout is off.
    pub fn sample<R: Rng>(rows: usize, cols: usize, keep_prob: f64, rng: &mut R) -> Option<Self> {
        if keep_prob >= 1.0 {
            return None;
        }
        let inv = 1.0 / keep_prob;
        let scale = Array2::from_shape_simple_fn((rows, cols), || if rng.gen::<f64>() < keep_prob { inv } else { 0.0 });
        Some(Self { scale })
    }

    pub fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        x * &self.scale
    }

    /// Gradient through the mask is the same elementwise product.
    pub fn backward(&self, d: &Array2<f64>) -> Array2<f64> {
        d * &self.scale
    }
}
