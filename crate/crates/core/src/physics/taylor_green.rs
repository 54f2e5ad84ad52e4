use serde::{Deserialize, Serialize};

use super::PhysicsError;
use crate::autodiff::{hd_eval_many, HyperDual, Scalar};

/// Decaying Taylor–Green vortex on the periodic square `[0, 2π]²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaylorGreenConfig {
    pub viscosity: f64,
    /// Fixed evaluation time t*.
    pub time: f64,
    pub amplitude: f64,
    /// Backward-Euler step used by the fixed-time residual of the PINN.
    pub residual_dt: f64,
}

impl Default for TaylorGreenConfig {
    fn default() -> Self {
        Self { viscosity: 0.01, time: 1.0, amplitude: 1.0, residual_dt: 1e-3 }
    }
}

impl TaylorGreenConfig {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.viscosity > 0.0) || !(self.time >= 0.0) || !self.amplitude.is_finite() {
            return Err(PhysicsError::InvalidConfig(
                "taylor-green needs viscosity > 0, time >= 0 and a finite amplitude".into(),
            ));
        }
        if !(self.residual_dt > 0.0 && self.residual_dt <= self.time.max(f64::MIN_POSITIVE)) {
            return Err(PhysicsError::InvalidConfig("residual_dt must lie in (0, time]".into()));
        }
        Ok(())
    }
}

/// `(u, v, p)` at the space-time point `(x, y, t)`:
/// `u = A cos x sin y e^{−2νt}`, `v = −A sin x cos y e^{−2νt}`,
/// `p = −(A²/4)(cos 2x + cos 2y) e^{−4νt}`.
pub fn tg_fields<T: Scalar>(cfg: &TaylorGreenConfig, xyt: &[T]) -> [T; 3] {
    let (x, y, t) = (xyt[0], xyt[1], xyt[2]);
    let a = cfg.amplitude;
    let decay = (t * (-2.0 * cfg.viscosity)).exp();
    let u = x.cos() * y.sin() * decay * a;
    let v = -(x.sin() * y.cos() * decay * a);
    let p = ((x * 2.0).cos() + (y * 2.0).cos()) * (decay * decay) * (-0.25 * a * a);
    [u, v, p]
}

/// `(u, v, p)` at the configured time.
pub fn tg_exact(cfg: &TaylorGreenConfig, x: f64, y: f64) -> [f64; 3] {
    tg_fields(cfg, &[x, y, cfg.time])
}

/// Incompressible Navier–Stokes residual
/// `(u_t + u·∇u + ∇p − ν∇²u, ∇·u)` of a field `(x, y, t) ↦ (u, v, p)`.
pub fn ns_residual<F>(field: F, x: [f64; 2], t: f64, nu: f64) -> Result<[f64; 3], PhysicsError>
where
    F: Fn(&[HyperDual]) -> Vec<HyperDual>,
{
    let p = [x[0], x[1], t];
    let dx = hd_eval_many(&field, &p, 0, 0)?;
    let dy = hd_eval_many(&field, &p, 1, 1)?;
    let dt = hd_eval_many(&field, &p, 2, 2)?;
    let (u, v) = (dx[0].value, dx[1].value);
    let mom = |c: usize| {
        dt[c].d1 + u * dx[c].d1 + v * dy[c].d1 + [dx[2].d1, dy[2].d1][c] - nu * (dx[c].d12 + dy[c].d12)
    };
    Ok([mom(0), mom(1), dx[0].d1 + dy[1].d1])
}
