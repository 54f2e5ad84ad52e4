//! Scalar automatic differentiation.
//!
//! Two mechanisms live here:
//!
//! * forward mode with [`HyperDual`] numbers, giving exact first and second
//!   derivatives of a field with respect to its spatial inputs (one pass per
//!   direction pair), and
//! * reverse mode with a [`Tape`], giving gradients of a scalar loss with
//!   respect to many parameters in one backward sweep.
//!
//! Model and operator code is written once against the [`Scalar`] trait and
//! runs unchanged on `f64`, `HyperDual`, [`Jet3`] and tape variables.

mod field_jet;
mod hyperdual;
mod jet3;
mod scalar;
mod tape;

pub use field_jet::{FieldJet, JetOrder};
pub use hyperdual::HyperDual;
pub use jet3::Jet3;
pub use scalar::Scalar;
pub use tape::{grad_params, Adjoints, Opcode, Tape, Var};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("non-finite derivative evaluating at {point:?} (division by zero or ln/sqrt of a non-positive value)")]
    NonFinite { point: Vec<f64> },
    #[error("direction index {dir} out of range for a {dim}-dimensional point")]
    Direction { dir: usize, dim: usize },
    #[error("non-finite adjoint at tape node {node} ({op})")]
    NonFiniteAdjoint { node: usize, op: String },
}

/// Value, first derivatives along `dir1` / `dir2` and the mixed second derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HdEval {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

impl From<HyperDual> for HdEval {
    fn from(h: HyperDual) -> Self {
        Self { value: h.re, d1: h.e1, d2: h.e2, d12: h.e12 }
    }
}

fn check_dirs(x: &[f64], dir1: usize, dir2: usize) -> Result<(), AutodiffError> {
    for dir in [dir1, dir2] {
        if dir >= x.len() {
            return Err(AutodiffError::Direction { dir, dim: x.len() });
        }
    }
    Ok(())
}

/// Evaluate `f` at `x` with hyper-dual seeding along `dir1` and `dir2`.
pub fn hd_eval<F>(f: F, x: &[f64], dir1: usize, dir2: usize) -> Result<HdEval, AutodiffError>
where
    F: Fn(&[HyperDual]) -> HyperDual,
{
    check_dirs(x, dir1, dir2)?;
    let out = f(&HyperDual::seed(x, dir1, dir2));
    if !out.is_finite() {
        return Err(AutodiffError::NonFinite { point: x.to_vec() });
    }
    Ok(out.into())
}

/// Vector-valued variant of [`hd_eval`]: one seeded pass, every output component.
pub fn hd_eval_many<F>(f: F, x: &[f64], dir1: usize, dir2: usize) -> Result<Vec<HdEval>, AutodiffError>
where
    F: Fn(&[HyperDual]) -> Vec<HyperDual>,
{
    check_dirs(x, dir1, dir2)?;
    let out = f(&HyperDual::seed(x, dir1, dir2));
    if out.iter().any(|h| !h.is_finite()) {
        return Err(AutodiffError::NonFinite { point: x.to_vec() });
    }
    Ok(out.into_iter().map(HdEval::from).collect())
}

/// `Σ_k ∂²f/∂x_k²` over all coordinates of `x`.
pub fn laplacian<F>(f: F, x: &[f64]) -> Result<f64, AutodiffError>
where
    F: Fn(&[HyperDual]) -> HyperDual,
{
    laplacian_dims(f, x, x.len())
}

/// Laplacian over the leading `dims` coordinates only (e.g. spatial part of a
/// space-time point).
pub fn laplacian_dims<F>(f: F, x: &[f64], dims: usize) -> Result<f64, AutodiffError>
where
    F: Fn(&[HyperDual]) -> HyperDual,
{
    let mut sum = 0.0;
    for k in 0..dims {
        sum += hd_eval(&f, x, k, k)?.d12;
    }
    Ok(sum)
}

/// Gradient of `f` at `x`; two directions per hyper-dual pass.
pub fn gradient<F>(f: F, x: &[f64]) -> Result<Vec<f64>, AutodiffError>
where
    F: Fn(&[HyperDual]) -> HyperDual,
{
    let d = x.len();
    let mut g = vec![0.0; d];
    let mut k = 0;
    while k < d {
        let k2 = (k + 1).min(d - 1);
        let h = hd_eval(&f, x, k, k2)?;
        g[k] = h.d1;
        g[k2] = h.d2;
        k += 2;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let h = hd_eval(|x| x[0] * x[0], &[3.0], 0, 0).unwrap();
        assert_eq!((h.value, h.d1, h.d2, h.d12), (9.0, 6.0, 6.0, 2.0));
    }

    #[test]
    fn tanh_at_origin() {
        let h = hd_eval(|x| x[0].tanh(), &[0.0], 0, 0).unwrap();
        assert_eq!((h.value, h.d1, h.d2, h.d12), (0.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn harmonic_polynomials() {
        let l = laplacian(|x| x[0] * x[0] - x[1] * x[1], &[0.4, -1.3]).unwrap();
        assert_eq!(l, 0.0);
        let l = laplacian(|x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2], &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(l, 6.0);
    }

    #[test]
    fn mixed_derivative_matches_central_differences() {
        // f = exp(x)·sin(y); step 1e-4 central differences, 1e-6 relative.
        let f = |x: f64, y: f64| x.exp() * y.sin();
        let (x, y, h) = (0.3, 0.7, 1e-4);
        let fd = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
        let ad = hd_eval(|p| p[0].exp() * p[1].sin(), &[x, y], 0, 1).unwrap();
        assert!(((ad.d12 - fd) / fd).abs() < 1e-6, "{} vs {}", ad.d12, fd);
        assert!((ad.d12 - x.exp() * y.cos()).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_are_reported() {
        assert!(matches!(
            hd_eval(|x| x[0].ln(), &[-1.0], 0, 0),
            Err(AutodiffError::NonFinite { .. })
        ));
        assert!(matches!(
            hd_eval(|x| x[0].sqrt(), &[0.0], 0, 0),
            Err(AutodiffError::NonFinite { .. })
        ));
        assert!(matches!(
            hd_eval(|x| x[0].recip(), &[0.0], 0, 0),
            Err(AutodiffError::NonFinite { .. })
        ));
        assert!(matches!(
            hd_eval(|x| x[0], &[0.0], 0, 3),
            Err(AutodiffError::Direction { dir: 3, dim: 1 })
        ));
    }

    #[test]
    fn relu_kink_uses_left_limit() {
        let h = hd_eval(|x| x[0].relu(), &[0.0], 0, 0).unwrap();
        assert_eq!(h.d1, 0.0);
        let h = hd_eval(|x| x[0].relu(), &[1e-300], 0, 0).unwrap();
        assert_eq!(h.d1, 1.0);
    }

    #[test]
    fn gradient_odd_dimension() {
        let g = gradient(|x| x[0] * x[1] + x[2] * x[2], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g, vec![2.0, 1.0, 6.0]);
    }
}
