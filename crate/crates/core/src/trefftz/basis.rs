use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bessel::reduced_bessel_i;
use super::{TrefftzError, MAX_ARGUMENT};
use crate::autodiff::Scalar;

/// Highest helical order `l` that can be enumerated.
pub const MAX_HELICAL_ORDER: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    /// Harmonic functions in a periodic cylinder (scalar potential, 3D).
    HelicalHarmonic,
    /// Harmonic functions in the plane (scalar, 2D).
    PlanarHarmonic,
    /// Divergence-free Taylor–Green velocity modes (2-vector, 2D).
    TgStreamfunction,
}

/// A basis family plus its geometry. Fields not used by a family are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisSpec {
    pub family: BasisFamily,
    /// N_b.
    pub count: usize,
    /// Helical pitch h.
    pub pitch: f64,
    /// Highest polynomial degree M of the `Re/Im (x+iy)^m` terms.
    pub poly_degree: u32,
    /// Domain radius (helical) used to bound Bessel arguments.
    pub radius: f64,
    /// Planar separable-solution wavenumbers.
    pub wavenumbers: Vec<f64>,
    /// Taylor–Green `(k, l)` stream-function modes.
    pub modes: Vec<[u32; 2]>,
    pub viscosity: f64,
    /// Fixed evaluation time of the Taylor–Green modes.
    pub time: f64,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self {
            family: BasisFamily::HelicalHarmonic,
            count: 11,
            pitch: 1.0,
            poly_degree: 2,
            radius: 1.0,
            wavenumbers: vec![PI, 2.0 * PI, 3.0 * PI],
            modes: vec![[1, 1], [1, 2], [2, 1], [2, 2]],
            viscosity: 0.01,
            time: 1.0,
        }
    }
}

/// One enumerated basis function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisTerm {
    /// `z`, the uniform axial potential.
    Axial,
    /// `1`.
    Constant,
    /// `Re (x+iy)^m` or `Im (x+iy)^m`.
    Poly { m: u32, imag: bool },
    /// `I_l(l h r) cos(l(θ − h z))` or the `sin` variant.
    Helical { l: u32, sin: bool },
    /// `{sin,cos}(k x)·{sinh,cosh}(k y)` for wavenumber slot `k`.
    Separable { k: usize, cos_x: bool, cosh_y: bool },
    /// Velocity of `ψ = cos(kx) cos(ly) e^{−(k²+l²)νt}`.
    Stream { k: u32, l: u32 },
}

impl BasisSpec {
    pub fn helical(count: usize) -> Self {
        Self { count, ..Self::default() }
    }

    pub fn planar(count: usize) -> Self {
        Self { family: BasisFamily::PlanarHarmonic, count, ..Self::default() }
    }

    pub fn taylor_green(modes: Vec<[u32; 2]>, viscosity: f64, time: f64) -> Self {
        Self {
            family: BasisFamily::TgStreamfunction,
            count: modes.len(),
            modes,
            viscosity,
            time,
            ..Self::default()
        }
    }

    /// Spatial dimension of the points the basis is evaluated at.
    pub fn input_dim(&self) -> usize {
        match self.family {
            BasisFamily::HelicalHarmonic => 3,
            _ => 2,
        }
    }

    /// Components per basis function value.
    pub fn outputs(&self) -> usize {
        match self.family {
            BasisFamily::TgStreamfunction => 2,
            _ => 1,
        }
    }

    /// Number of functions the family can enumerate with this geometry.
    pub fn capacity(&self) -> usize {
        let poly = 2 * self.poly_degree as usize;
        match self.family {
            BasisFamily::HelicalHarmonic => 1 + poly + 2 * MAX_HELICAL_ORDER as usize,
            BasisFamily::PlanarHarmonic => 1 + poly + 4 * self.wavenumbers.len(),
            BasisFamily::TgStreamfunction => self.modes.len(),
        }
    }

    pub fn validate(&self) -> Result<(), TrefftzError> {
        let bad = |m: String| Err(TrefftzError::InvalidSpec(m));
        if self.count < 1 {
            return bad(format!("count must be >= 1, got {}", self.count));
        }
        if self.count > self.capacity() {
            return bad(format!(
                "count {} exceeds the {} functions this {:?} geometry enumerates",
                self.count,
                self.capacity(),
                self.family
            ));
        }
        match self.family {
            BasisFamily::HelicalHarmonic => {
                if !(self.pitch > 0.0 && self.pitch.is_finite()) {
                    return bad(format!("pitch must be > 0, got {}", self.pitch));
                }
                if !(self.radius > 0.0 && self.radius.is_finite()) {
                    return bad(format!("radius must be > 0, got {}", self.radius));
                }
                let l_max = self.highest_helical_order();
                let arg = f64::from(l_max) * self.pitch * self.radius;
                if arg > MAX_ARGUMENT {
                    return bad(format!("Bessel argument l·h·R = {arg} exceeds {MAX_ARGUMENT}"));
                }
            }
            BasisFamily::PlanarHarmonic => {
                if self.wavenumbers.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
                    return bad("wavenumbers must be finite and > 0".into());
                }
            }
            BasisFamily::TgStreamfunction => {
                if self.modes.iter().any(|m| m[0] == 0 && m[1] == 0) {
                    return bad("mode (0, 0) carries no velocity".into());
                }
                if !(self.viscosity >= 0.0 && self.time >= 0.0) {
                    return bad("viscosity and time must be >= 0".into());
                }
            }
        }
        Ok(())
    }

    fn highest_helical_order(&self) -> u32 {
        (0..self.count)
            .filter_map(|i| match self.term(i) {
                Ok(BasisTerm::Helical { l, .. }) => Some(l),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// The `index`-th function of the canonical enumeration.
    ///
    /// Helical: `z`, then `Re, Im (x+iy)^m` for `m = 1..=M`, then the cos and
    /// sin helical modes for `l = 1, 2, ...`. Planar: `1`, the same
    /// polynomials, then four separable solutions per wavenumber. Taylor–Green:
    /// the configured modes in order.
    pub fn term(&self, index: usize) -> Result<BasisTerm, TrefftzError> {
        if index >= self.count.min(self.capacity()) {
            return Err(TrefftzError::IndexOutOfRange { index, count: self.count });
        }
        let poly = 2 * self.poly_degree as usize;
        let poly_term = |j: usize| BasisTerm::Poly { m: (j / 2) as u32 + 1, imag: j % 2 == 1 };
        Ok(match self.family {
            BasisFamily::HelicalHarmonic => match index {
                0 => BasisTerm::Axial,
                i if i <= poly => poly_term(i - 1),
                i => {
                    let j = i - 1 - poly;
                    BasisTerm::Helical { l: (j / 2) as u32 + 1, sin: j % 2 == 1 }
                }
            },
            BasisFamily::PlanarHarmonic => match index {
                0 => BasisTerm::Constant,
                i if i <= poly => poly_term(i - 1),
                i => {
                    let j = i - 1 - poly;
                    BasisTerm::Separable { k: j / 4, cos_x: (j % 4) >= 2, cosh_y: j % 2 == 1 }
                }
            },
            BasisFamily::TgStreamfunction => {
                let [k, l] = self.modes[index];
                BasisTerm::Stream { k, l }
            }
        })
    }

    /// Stream function of Taylor–Green mode `index` (for level-set checks).
    pub fn stream_function(&self, index: usize, x: &[f64]) -> Result<f64, TrefftzError> {
        match self.term(index)? {
            BasisTerm::Stream { k, l } => {
                let (k, l) = (f64::from(k), f64::from(l));
                Ok((k * x[0]).cos() * (l * x[1]).cos() * self.tg_decay(k, l))
            }
            _ => Err(TrefftzError::InvalidSpec("stream function requested for a scalar family".into())),
        }
    }

    fn tg_decay(&self, k: f64, l: f64) -> f64 {
        (-(k * k + l * l) * self.viscosity * self.time).exp()
    }
}

/// `(Re, Im)` of `(x + iy)^m`, `m ≥ 1`.
fn complex_power<T: Scalar>(x: T, y: T, m: u32) -> (T, T) {
    let (mut re, mut im) = (x, y);
    for _ in 1..m {
        (re, im) = (re * x - im * y, re * y + im * x);
    }
    (re, im)
}

/// Evaluate basis function `index` at `x`, writing one value per output
/// component into `out` (one for harmonic families, `(u, v)` for Taylor–Green).
///
/// Taylor–Green velocities follow `u = −∂ψ/∂y, v = ∂ψ/∂x`, so mode `(1, 1)`
/// reproduces the reference vortex `(cos x sin y, −sin x cos y)`.
pub fn eval_basis<T: Scalar>(
    spec: &BasisSpec,
    index: usize,
    x: &[T],
    out: &mut [T],
) -> Result<(), TrefftzError> {
    let term = spec.term(index)?;
    if x.len() != spec.input_dim() {
        return Err(TrefftzError::DimensionMismatch { expected: spec.input_dim(), got: x.len() });
    }
    match term {
        BasisTerm::Axial => out[0] = x[2],
        BasisTerm::Constant => out[0] = x[0] * 0.0 + 1.0,
        BasisTerm::Poly { m, imag } => {
            let (re, im) = complex_power(x[0], x[1], m);
            out[0] = if imag { im } else { re };
        }
        BasisTerm::Helical { l, sin } => {
            // I_l(κr)·e^{il(θ−hz)} = G_l(r²)·(x+iy)^l·e^{−ilhz}, smooth through r = 0.
            let kappa = f64::from(l) * spec.pitch;
            let s = x[0] * x[0] + x[1] * x[1];
            let sv = s.value();
            let q = 0.5 * kappa;
            let g = s.chain([
                reduced_bessel_i(l, kappa, sv),
                q * reduced_bessel_i(l + 1, kappa, sv),
                q * q * reduced_bessel_i(l + 2, kappa, sv),
                q * q * q * reduced_bessel_i(l + 3, kappa, sv),
            ]);
            let (pr, pi) = complex_power(x[0], x[1], l);
            let phase = x[2] * kappa;
            let (c, sn) = (phase.cos(), phase.sin());
            out[0] = if sin { g * (pi * c - pr * sn) } else { g * (pr * c + pi * sn) };
        }
        BasisTerm::Separable { k, cos_x, cosh_y } => {
            let k = spec.wavenumbers[k];
            let fx = if cos_x { (x[0] * k).cos() } else { (x[0] * k).sin() };
            let fy = if cosh_y { (x[1] * k).cosh() } else { (x[1] * k).sinh() };
            out[0] = fx * fy;
        }
        BasisTerm::Stream { k, l } => {
            let (kf, lf) = (f64::from(k), f64::from(l));
            let decay = spec.tg_decay(kf, lf);
            let (kx, ly) = (x[0] * kf, x[1] * lf);
            out[0] = kx.cos() * ly.sin() * (lf * decay);
            out[1] = kx.sin() * ly.cos() * (-kf * decay);
        }
    }
    Ok(())
}
