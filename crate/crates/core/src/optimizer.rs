//! AdaBelief optimizer.
//!
//! Adam-shaped update where the second accumulator tracks the squared
//! deviation of the gradient from its first moment (the "belief"),
//! with ε added both inside the accumulator and in the denominator:
//!
//!   m ← β₁m + (1−β₁)g
//!   s ← β₂s + (1−β₂)(g−m)² + ε
//!   params ← params − η · m̂ / (√ŝ + ε)   (hats are bias-corrected)

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBelief {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Optional global gradient-norm clip applied before the update.
    pub grad_clip: Option<f64>,
    step: u64,
    m: Vec<f64>,
    s: Vec<f64>,
}

impl AdaBelief {
    pub fn new(dim: usize, learning_rate: f64) -> Self {
        AdaBelief {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-16,
            grad_clip: None,
            step: 0,
            m: vec![0.0; dim],
            s: vec![0.0; dim],
        }
    }

    pub fn with_grad_clip(mut self, clip: Option<f64>) -> Self {
        self.grad_clip = clip;
        self
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One in-place update. Rejects non-finite gradients before touching
    /// any state, naming the offending parameter index.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        debug_assert_eq!(params.len(), self.m.len());
        debug_assert_eq!(grads.len(), self.m.len());
        if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { index });
        }
        let clip_scale = match self.grad_clip {
            Some(c) => {
                let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
                if norm > c {
                    c / norm
                } else {
                    1.0
                }
            }
            None => 1.0,
        };
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i] * clip_scale;
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            let belief = g - self.m[i];
            self.s[i] = self.beta2 * self.s[i] + (1.0 - self.beta2) * belief * belief + self.epsilon;
            let m_hat = self.m[i] / bc1;
            let s_hat = self.s[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (s_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Rng;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut opt = AdaBelief::new(3, 1e-3);
        let mut params = vec![1.0, -2.0, 0.5];
        opt.step(&mut params, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(params, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_hand_evaluation() {
        // scalar, g = 1, η = 1e-3: m̂ = 1, ŝ = 0.81 + ε̃ → step ≈ η/0.9
        let mut opt = AdaBelief::new(1, 1e-3);
        let mut params = vec![0.0];
        opt.step(&mut params, &[1.0]).unwrap();
        let expect = -1e-3 / 0.9;
        assert!(
            (params[0] - expect).abs() < 1e-6 * expect.abs(),
            "update {} vs {expect}",
            params[0]
        );
    }

    #[test]
    fn non_finite_gradient_names_index() {
        let mut opt = AdaBelief::new(3, 1e-3);
        let mut params = vec![0.0; 3];
        let before = opt.clone();
        match opt.step(&mut params, &[0.0, f64::NAN, 0.0]) {
            Err(Error::NonFiniteGradient { index }) => assert_eq!(index, 1),
            other => panic!("expected gradient error, got {other:?}"),
        }
        assert_eq!(opt, before); // state untouched on error
    }

    #[test]
    fn deterministic_trajectories() {
        let run = || {
            let mut rng = Rng::new(77);
            let mut opt = AdaBelief::new(4, 1e-2);
            let mut params = vec![0.0; 4];
            for _ in 0..100 {
                let grads = rng.sample_std_normal(4);
                opt.step(&mut params, &grads).unwrap();
            }
            params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn update_bounded_after_warmup() {
        let mut rng = Rng::new(78);
        let mut opt = AdaBelief::new(1, 1e-2);
        let mut params = vec![0.0];
        let mut max_ratio = 0.0_f64;
        for step in 0..1000 {
            let prev = params[0];
            opt.step(&mut params, &[rng.next_normal()]).unwrap();
            if step >= 50 {
                max_ratio = max_ratio.max((params[0] - prev).abs() / opt.learning_rate);
            }
        }
        assert!(max_ratio <= 1.2, "max step ratio {max_ratio}");
    }

    #[test]
    fn grad_clip_rescales_global_norm() {
        let mut clipped = AdaBelief::new(2, 1e-2).with_grad_clip(Some(1.0));
        let mut free = AdaBelief::new(2, 1e-2);
        let mut p1 = vec![0.0, 0.0];
        let mut p2 = vec![0.0, 0.0];
        clipped.step(&mut p1, &[30.0, 40.0]).unwrap();
        free.step(&mut p2, &[0.6, 0.8]).unwrap(); // same direction, norm 1
        assert!((p1[0] - p2[0]).abs() < 1e-12);
        assert!((p1[1] - p2[1]).abs() < 1e-12);
    }

    #[test]
    fn state_serialization_roundtrips_exactly() {
        let mut rng = Rng::new(79);
        let mut opt = AdaBelief::new(5, 3e-3).with_grad_clip(Some(100.0));
        let mut params = vec![0.0; 5];
        for _ in 0..37 {
            let grads = rng.sample_std_normal(5);
            opt.step(&mut params, &grads).unwrap();
        }
        let json = serde_json::to_string(&opt).unwrap();
        let back: AdaBelief = serde_json::from_str(&json).unwrap();
        assert_eq!(opt, back);
    }
}
