//! The weight-space sequence model: a linear recurrence `z_{t+1} = φ z_t`
//! rolled out from a learned initial state, with exact reverse-mode
//! gradients and spectral diagnostics.
//!
//! State layout:
//!   deterministic — `[θ | augment]`, S = D_θ + a
//!   stochastic    — `[μ | s | augment]`, S = 2·D_θ + a, σ = softplus(s) + σ_min
//!
//! Augment channels give the linear map room beyond the raw weight
//! dimension (a pure oscillation needs a 2-plane); they are zero at
//! initialization, learned freely afterwards, and never read by the
//! predictor.

use crate::error::{Error, Result};
use crate::numkit::{eigvals_small, Matrix, Rng};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const SIGMA_MIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Deterministic,
    Stochastic,
}

/// Transition matrix plus learned initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceModel {
    pub state_dim: usize,
    pub mode: Mode,
    pub theta_dim: usize,
    pub augment_dim: usize,
    pub phi: Matrix,
    pub init_state: Vec<f64>,
    pub sigma_min: f64,
}

/// State trajectory `z_1 .. z_horizon`; `states[0]` is the initial state.
#[derive(Debug, Clone)]
pub struct Rollout {
    pub states: Vec<Vec<f64>>,
}

impl Rollout {
    pub fn horizon(&self) -> usize {
        self.states.len()
    }

    /// State at 1-based step `t`.
    pub fn state(&self, t: usize) -> &[f64] {
        &self.states[t - 1]
    }
}

/// Weight view of one state.
#[derive(Debug, Clone)]
pub enum WeightState {
    Deterministic { theta: Vec<f64> },
    Stochastic { mu: Vec<f64>, sigma: Vec<f64> },
}

pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl RecurrenceModel {
    pub fn state_dim_for(mode: Mode, theta_dim: usize, augment_dim: usize) -> usize {
        match mode {
            Mode::Deterministic => theta_dim + augment_dim,
            Mode::Stochastic => 2 * theta_dim + augment_dim,
        }
    }

    /// Near-identity initialization: φ = I + N(0, 0.01²) entrywise,
    /// weight channels of z₁ ~ N(0, 0.1²), augment channels zero. Keeping
    /// ‖φ‖ near 1 keeps long early rollouts from overflowing before any
    /// learning happens.
    pub fn init_random(mode: Mode, theta_dim: usize, augment_dim: usize, rng: &mut Rng) -> Self {
        let s = Self::state_dim_for(mode, theta_dim, augment_dim);
        let mut phi = Matrix::identity(s);
        for v in phi.data_mut() {
            *v += 0.01 * rng.next_normal();
        }
        let learned = s - augment_dim;
        let mut init_state = vec![0.0; s];
        for v in init_state.iter_mut().take(learned) {
            *v = 0.1 * rng.next_normal();
        }
        RecurrenceModel {
            state_dim: s,
            mode,
            theta_dim,
            augment_dim,
            phi,
            init_state,
            sigma_min: SIGMA_MIN,
        }
    }

    /// Learnable scalar count: S² for φ plus S for the initial state.
    pub fn param_count(&self) -> usize {
        self.state_dim * self.state_dim + self.state_dim
    }

    /// Flatten (φ row-major, then z₁) for the optimizer.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut p = self.phi.data().to_vec();
        p.extend_from_slice(&self.init_state);
        p
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        let s2 = self.state_dim * self.state_dim;
        debug_assert_eq!(params.len(), s2 + self.state_dim);
        self.phi.data_mut().copy_from_slice(&params[..s2]);
        self.init_state.copy_from_slice(&params[s2..]);
    }

    /// Iterated rollout `z_t = φ^{t−1} z₁` for `t = 1..=horizon`.
    pub fn rollout(&self, horizon: usize) -> Result<Rollout> {
        if horizon == 0 {
            return Err(Error::ZeroHorizon);
        }
        let mut states = Vec::with_capacity(horizon);
        states.push(self.init_state.clone());
        for _ in 1..horizon {
            let next = self.phi.matvec(states.last().expect("nonempty"));
            states.push(next);
        }
        Ok(Rollout { states })
    }

    /// Reverse-mode gradients of a loss through the rollout.
    ///
    /// Given `state_grads[t−1] = ∂L/∂z_t`, runs the adjoint recursion
    /// `λ_t = g_t + φᵀ λ_{t+1}` (with `λ_{horizon+1} = 0`) and returns
    /// `∂L/∂φ = Σ_{t≥2} λ_t z_{t−1}ᵀ` and `∂L/∂z₁ = λ_1`.
    pub fn rollout_adjoint(
        &self,
        horizon: usize,
        state_grads: &[Vec<f64>],
    ) -> Result<(Matrix, Vec<f64>)> {
        if state_grads.len() != horizon {
            return Err(Error::ShapeMismatch {
                context: "adjoint state gradients",
                expected: horizon,
                actual: state_grads.len(),
            });
        }
        let rollout = self.rollout(horizon)?;
        let s = self.state_dim;
        let mut grad_phi = Matrix::zeros(s, s);
        let mut lambda = vec![0.0; s];
        for t in (1..=horizon).rev() {
            let g = &state_grads[t - 1];
            if g.len() != s {
                return Err(Error::ShapeMismatch {
                    context: "adjoint state gradient entry",
                    expected: s,
                    actual: g.len(),
                });
            }
            let mut next = self.phi.matvec_t(&lambda);
            for (nv, gv) in next.iter_mut().zip(g) {
                *nv += gv;
            }
            lambda = next;
            if t >= 2 {
                grad_phi.add_scaled_outer(1.0, &lambda, rollout.state(t - 1));
            }
        }
        Ok((grad_phi, lambda))
    }

    /// Split a raw state into its weight view.
    pub fn split_state(&self, state: &[f64]) -> WeightState {
        debug_assert_eq!(state.len(), self.state_dim);
        match self.mode {
            Mode::Deterministic => WeightState::Deterministic {
                theta: state[..self.theta_dim].to_vec(),
            },
            Mode::Stochastic => WeightState::Stochastic {
                mu: state[..self.theta_dim].to_vec(),
                sigma: state[self.theta_dim..2 * self.theta_dim]
                    .iter()
                    .map(|&s| softplus(s) + self.sigma_min)
                    .collect(),
            },
        }
    }

    /// Mean-weight slice of a state (the full weight vector in
    /// deterministic mode).
    pub fn mean_slice<'a>(&self, state: &'a [f64]) -> &'a [f64] {
        &state[..self.theta_dim]
    }

    /// Pre-softplus scale slice (stochastic mode only).
    pub fn scale_slice<'a>(&self, state: &'a [f64]) -> &'a [f64] {
        debug_assert_eq!(self.mode, Mode::Stochastic);
        &state[self.theta_dim..2 * self.theta_dim]
    }

    /// Reparameterised weight draw `μ + σ ⊙ ε`, `ε ~ N(0, I)`.
    pub fn sample_weights(&self, state: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
        match self.split_state(state) {
            WeightState::Deterministic { .. } => Err(Error::WrongMode {
                required: Mode::Stochastic,
            }),
            WeightState::Stochastic { mu, sigma } => Ok(mu
                .iter()
                .zip(&sigma)
                .map(|(m, s)| m + s * rng.next_normal())
                .collect()),
        }
    }

    /// Eigenvalues of φ with a stability classification, sorted by
    /// descending modulus. A modulus above 1 means the weight
    /// extrapolation diverges as t grows; a complex pair at modulus ≈ 1
    /// sustains an oscillation.
    pub fn spectral_report(&self) -> Result<Vec<SpectralLine>> {
        let eigs = eigvals_small(&self.phi)?;
        Ok(eigs
            .into_iter()
            .map(|eigenvalue| {
                let modulus = eigenvalue.norm();
                let class = if (modulus - 1.0).abs() <= 1e-6 {
                    SpectralClass::Neutral
                } else if modulus < 1.0 {
                    SpectralClass::Decaying
                } else {
                    SpectralClass::Growing
                };
                SpectralLine {
                    eigenvalue,
                    modulus,
                    class,
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub eigenvalue: Complex64,
    pub modulus: f64,
    pub class: SpectralClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralClass {
    Decaying,
    Neutral,
    Growing,
}
