//! Loss assembly, the standard and Trefftz-constrained training pipelines,
//! and the matched-MSE comparison protocol.

mod data;
mod loss;
mod pinn;
mod problem;
mod protocol;
mod trace;
mod trefftz_fit;

pub use data::{Dataset, Samples};
pub use loss::{pinn_loss, ExactModel, JetModel, LossTerms, LossWeights};
pub use pinn::{mlp_eval_mse, train_pinn, train_pinn_on};
pub use problem::Problem;
pub use protocol::{matched_mse_protocol, matched_mse_protocol_on, relative_gap, ComparisonBundle};
pub use trace::{EpochRecord, TrainTrace};
pub use trefftz_fit::{expansion_eval_mse, train_trefftz, train_trefftz_on};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::AutodiffError;
use crate::mlp::{Activation, MlpError};
use crate::physics::PhysicsError;
use crate::trefftz::TrefftzError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("loss needs data points or collocation points, both are empty")]
    EmptyLoss,
    #[error("model has {got} outputs, the residual needs {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training diverged at epoch {epoch}: {reason}")]
    Diverged { epoch: usize, reason: String, trace: Box<TrainTrace> },
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error(transparent)]
    Trefftz(#[from] TrefftzError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

/// Update rule for Trefftz coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffOptimizer {
    /// Gradient step preconditioned by the pseudo-inverse of the data
    /// Gram matrix. The loss is quadratic in the coefficients, so this is
    /// Gauss–Newton with damping `coeff_lr`.
    #[default]
    GaussNewton,
    Adam,
}

/// Settings shared by every training pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub n_data: usize,
    pub n_collocation: usize,
    pub lambda_pde: f64,
    pub lambda_data: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Stop at the first epoch whose eval MSE is at or below this value.
    /// An infinite target behaves like no target.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse_target: Option<f64>,
    /// Points per axis of the held-out evaluation grid.
    pub eval_grid: usize,
    /// Points per axis of the finer grid used for final reports.
    pub report_grid: usize,
    /// Hidden layer widths of the standard PINN.
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub lr: f64,
    /// Step size for Trefftz coefficients.
    pub coeff_lr: f64,
    pub coeff_optimizer: CoeffOptimizer,
    /// Hidden widths of the Trefftz residual network; empty disables it.
    pub trefftz_hidden: Vec<usize>,
    /// Adam step size of the Trefftz residual network.
    pub trefftz_lr: f64,
    /// Initialize Trefftz coefficients by least squares on the data.
    pub warm_start: bool,
    /// Standard deviation of Gaussian noise added to training data.
    pub noise_std: f64,
    /// Draw data points on the boundary instead of the interior.
    pub boundary_data: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_data: 128,
            n_collocation: 256,
            lambda_pde: 1.0,
            lambda_data: 1.0,
            max_epochs: 2000,
            seed: 0,
            mse_target: None,
            eval_grid: 13,
            report_grid: 21,
            hidden: vec![32, 32, 32],
            activation: Activation::Tanh,
            lr: 1e-3,
            coeff_lr: 1e-2,
            coeff_optimizer: CoeffOptimizer::GaussNewton,
            trefftz_hidden: vec![16, 16],
            trefftz_lr: 1e-5,
            warm_start: false,
            noise_std: 0.0,
            boundary_data: false,
        }
    }
}

impl TrainConfig {
    pub fn weights(&self) -> LossWeights {
        LossWeights { pde: self.lambda_pde, data: self.lambda_data }
    }

    /// Target that actually triggers early stopping.
    pub fn active_target(&self) -> Option<f64> {
        self.mse_target.filter(|t| t.is_finite())
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        if !nonneg(self.lambda_pde) || !nonneg(self.lambda_data) {
            return bad("lambda_pde and lambda_data must be finite and >= 0");
        }
        if self.n_data + self.n_collocation == 0 {
            return bad("n_data + n_collocation must be >= 1");
        }
        if self.eval_grid < 2 || self.report_grid < 2 {
            return bad("eval_grid and report_grid must be >= 2");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) || self.trefftz_hidden.contains(&0) {
            return bad("hidden widths must be >= 1 and the PINN needs at least one hidden layer");
        }
        if !(self.lr > 0.0 && self.coeff_lr > 0.0 && self.trefftz_lr > 0.0) {
            return bad("lr, coeff_lr and trefftz_lr must be > 0");
        }
        if !nonneg(self.noise_std) {
            return bad("noise_std must be finite and >= 0");
        }
        if let Some(t) = self.mse_target {
            if t.is_nan() || t < 0.0 {
                return bad("mse_target must be >= 0");
            }
        }
        Ok(())
    }
}
