//! The per-ring base model: an affine map whose weights are supplied per
//! call. Weights are data here, not internal state — the sequence model
//! produces a fresh weight vector for every ring.

use crate::error::{Error, Result};
use crate::numkit::Matrix;
use serde::{Deserialize, Serialize};

/// Affine predictor `ŷ = θ¹x + θ²`.
///
/// The flat weight layout is the slope block `θ¹` (row-major, D_y × D_x)
/// followed by the intercept block `θ²` (D_y), so `D_θ = D_y·(D_x + 1)`.
/// Prediction is exactly linear in θ, which makes the weight Jacobian
/// exact and independent of θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearPredictor {
    pub input_dim: usize,
    pub output_dim: usize,
}

impl LinearPredictor {
    pub fn new(input_dim: usize, output_dim: usize) -> Self {
        LinearPredictor { input_dim, output_dim }
    }

    pub fn theta_dim(&self) -> usize {
        self.output_dim * (self.input_dim + 1)
    }

    fn check(&self, theta: &[f64], x: &[f64]) -> Result<()> {
        if theta.len() != self.theta_dim() {
            return Err(Error::ShapeMismatch {
                context: "predictor weights",
                expected: self.theta_dim(),
                actual: theta.len(),
            });
        }
        if x.len() != self.input_dim {
            return Err(Error::ShapeMismatch {
                context: "predictor input",
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check(theta, x)?;
        let (dx, dy) = (self.input_dim, self.output_dim);
        let intercepts = &theta[dy * dx..];
        let mut out = Vec::with_capacity(dy);
        for r in 0..dy {
            let slopes = &theta[r * dx..(r + 1) * dx];
            out.push(crate::numkit::dot(slopes, x) + intercepts[r]);
        }
        Ok(out)
    }

    /// `J = ∂ŷ/∂θ` (D_y × D_θ), exact for this predictor: row `r` carries
    /// `x` in its own slope columns and 1 in its own intercept column.
    pub fn weight_jacobian(&self, theta: &[f64], x: &[f64]) -> Result<Matrix> {
        self.check(theta, x)?;
        let (dx, dy) = (self.input_dim, self.output_dim);
        let mut j = Matrix::zeros(dy, self.theta_dim());
        for r in 0..dy {
            for c in 0..dx {
                j[(r, r * dx + c)] = x[c];
            }
            j[(r, dy * dx + r)] = 1.0;
        }
        Ok(j)
    }
}
