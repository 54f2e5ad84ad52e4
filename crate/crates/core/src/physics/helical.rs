use serde::{Deserialize, Serialize};

use super::PhysicsError;
use crate::autodiff::Scalar;
use crate::trefftz::{bessel_i, bessel_i_prime, reduced_bessel_i, BasisSpec, TrefftzExpansion, MAX_HELICAL_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelicalMode {
    pub l: u32,
    pub eps: f64,
}

/// Vacuum field `B = −∇Φ` with
/// `Φ = b0·z + Σ_l (ε_l / (l h)) I_l(l h r) sin(l(θ − h z))`
/// in the cylinder `r ≤ R`, periodic in `z` with period `2π/h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HelicalFieldConfig {
    pub b0: f64,
    pub modes: Vec<HelicalMode>,
    pub pitch: f64,
    pub radius: f64,
}

impl Default for HelicalFieldConfig {
    fn default() -> Self {
        Self { b0: 1.0, modes: vec![HelicalMode { l: 2, eps: 0.3 }], pitch: 1.0, radius: 1.0 }
    }
}

impl HelicalFieldConfig {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        let bad = |m: String| Err(PhysicsError::InvalidConfig(m));
        if !(self.pitch > 0.0 && self.pitch.is_finite()) {
            return bad(format!("pitch must be > 0, got {}", self.pitch));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be > 0, got {}", self.radius));
        }
        for m in &self.modes {
            if m.l == 0 || m.l > MAX_HELICAL_ORDER {
                return bad(format!("mode order l must be in 1..={MAX_HELICAL_ORDER}, got {}", m.l));
            }
            if f64::from(m.l) * self.pitch * self.radius > crate::trefftz::MAX_ARGUMENT {
                return bad(format!("l·h·R too large for mode l = {}", m.l));
            }
        }
        Ok(())
    }

    /// Axial period `2π/h`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.pitch
    }

    /// The smallest default-ordered helical basis (`M = 2`) containing Φ exactly.
    pub fn basis_spec(&self) -> BasisSpec {
        let l_max = self.modes.iter().map(|m| m.l).max().unwrap_or(0) as usize;
        let base = BasisSpec { pitch: self.pitch, radius: self.radius, ..BasisSpec::default() };
        let poly = 2 * base.poly_degree as usize;
        BasisSpec { count: (1 + poly + 2 * l_max).max(1), ..base }
    }

    /// Φ as a coefficient vector over [`HelicalFieldConfig::basis_spec`], or
    /// over any longer helical spec sharing its pitch and polynomial degree.
    pub fn coefficients(&self, spec: &BasisSpec) -> Vec<f64> {
        let poly = 2 * spec.poly_degree as usize;
        let mut c = vec![0.0; spec.count];
        c[0] = self.b0;
        for m in &self.modes {
            let idx = 1 + poly + 2 * (m.l as usize - 1) + 1;
            if idx < c.len() {
                c[idx] += m.eps / (f64::from(m.l) * self.pitch);
            }
        }
        c
    }

    pub fn expansion(&self) -> TrefftzExpansion {
        let spec = self.basis_spec();
        let c = self.coefficients(&spec);
        TrefftzExpansion::new(spec, c, None).expect("valid helical spec")
    }

    fn check(&self, x: &[f64]) -> Result<(), PhysicsError> {
        let r = x[0].hypot(x[1]);
        if r > self.radius * (1.0 + 1e-12) {
            return Err(PhysicsError::OutsideDomain { r, radius: self.radius });
        }
        Ok(())
    }
}

/// Φ over any scalar type (no domain check).
pub fn potential<T: Scalar>(cfg: &HelicalFieldConfig, x: &[T]) -> T {
    cfg.expansion().eval_scalar(x).expect("3D point")
}

pub fn exact_potential(cfg: &HelicalFieldConfig, x: &[f64]) -> Result<f64, PhysicsError> {
    cfg.check(x)?;
    Ok(potential(cfg, x))
}

/// `B = −∇Φ` in Cartesian components, from the cylindrical chain rule.
pub fn exact_bfield(cfg: &HelicalFieldConfig, x: &[f64]) -> Result<[f64; 3], PhysicsError> {
    cfg.check(x)?;
    let (r, th, z) = (x[0].hypot(x[1]), x[1].atan2(x[0]), x[2]);
    let h = cfg.pitch;
    let (mut d_r, mut d_th_over_r, mut d_z) = (0.0, 0.0, cfg.b0);
    for m in &cfg.modes {
        let l = f64::from(m.l);
        let kappa = l * h;
        let a = m.eps / kappa;
        let phase = l * (th - h * z);
        let (s, c) = phase.sin_cos();
        let map = |e| PhysicsError::InvalidConfig(format!("{e}"));
        d_r += a * kappa * bessel_i_prime(m.l, kappa * r).map_err(map)? * s;
        // I_l(κr)/r = G_l(r²)·r^{l−1}, finite on the axis.
        let i_over_r = reduced_bessel_i(m.l, kappa, r * r) * r.powi(m.l as i32 - 1);
        d_th_over_r += a * l * i_over_r * c;
        d_z -= a * bessel_i(m.l, kappa * r).map_err(map)? * l * h * c;
    }
    let (st, ct) = th.sin_cos();
    Ok([-(d_r * ct - d_th_over_r * st), -(d_r * st + d_th_over_r * ct), -d_z])
}
