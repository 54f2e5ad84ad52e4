use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::PhysicsError;
use crate::autodiff::Scalar;

/// Point source released at `x0`, advected with constant velocity `v` and
/// diffusing with diffusivity `D`, shifted in time by `t0` so it is smooth at `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdvDiffConfig {
    pub diffusivity: f64,
    pub velocity: [f64; 3],
    pub t0: f64,
    pub x0: [f64; 3],
    /// Half-width of the spatial sampling box `[-L, L]³`.
    pub half_width: f64,
    /// End of the sampled time window `[0, T]`.
    pub t_max: f64,
}

impl Default for AdvDiffConfig {
    fn default() -> Self {
        Self {
            diffusivity: 0.05,
            velocity: [0.4, 0.2, 0.0],
            t0: 0.1,
            x0: [-0.2, -0.1, 0.0],
            half_width: 0.6,
            t_max: 1.0,
        }
    }
}

impl AdvDiffConfig {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.diffusivity > 0.0) || !(self.t0 > 0.0) || !(self.half_width > 0.0) || !(self.t_max > 0.0) {
            return Err(PhysicsError::InvalidConfig(
                "advection-diffusion needs diffusivity, t0, half_width and t_max > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Closed-form concentration and derivatives at one space-time point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdvDiffState {
    pub c: f64,
    pub grad: [f64; 3],
    pub laplacian: f64,
    pub dcdt: f64,
}

/// `c = (4πDτ)^{−3/2} exp(−|d|²/(4Dτ))` with `τ = t + t0`, `d = x − x0 − v t`.
pub fn advdiff_exact(cfg: &AdvDiffConfig, x: &[f64; 3], t: f64) -> AdvDiffState {
    let dif = cfg.diffusivity;
    let tau = t + cfg.t0;
    let d: Vec<f64> = (0..3).map(|k| x[k] - cfg.x0[k] - cfg.velocity[k] * t).collect();
    let d2: f64 = d.iter().map(|v| v * v).sum();
    let dv: f64 = (0..3).map(|k| d[k] * cfg.velocity[k]).sum();
    let c = (4.0 * PI * dif * tau).powf(-1.5) * (-d2 / (4.0 * dif * tau)).exp();
    let s = -c / (2.0 * dif * tau);
    AdvDiffState {
        c,
        grad: [s * d[0], s * d[1], s * d[2]],
        laplacian: c * (d2 / (4.0 * dif * dif * tau * tau) - 3.0 / (2.0 * dif * tau)),
        dcdt: c * (-1.5 / tau + d2 / (4.0 * dif * tau * tau) + dv / (2.0 * dif * tau)),
    }
}

/// Concentration over any scalar type at `(x, y, z, t)`.
pub fn advdiff_value<T: Scalar>(cfg: &AdvDiffConfig, p: &[T]) -> T {
    let dif = cfg.diffusivity;
    let tau = p[3] + cfg.t0;
    let mut d2 = p[0] * 0.0;
    for k in 0..3 {
        let d = p[k] - p[3] * cfg.velocity[k] - cfg.x0[k];
        d2 = d2 + d * d;
    }
    (tau * (4.0 * PI * dif)).powf(-1.5) * (-(d2 / (tau * (4.0 * dif)))).exp()
}
