//! Exact reference solutions and PDE residual operators.

mod advdiff;
mod helical;
mod taylor_green;

pub use advdiff::{advdiff_exact, advdiff_value, AdvDiffConfig, AdvDiffState};
pub use helical::{exact_bfield, exact_potential, potential, HelicalFieldConfig, HelicalMode};
pub use taylor_green::{ns_residual, tg_exact, tg_fields, TaylorGreenConfig};

use std::f64::consts::PI;

use thiserror::Error;

use crate::autodiff::{AutodiffError, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("point at radius {r} lies outside the domain radius {radius}")]
    OutsideDomain { r: f64, radius: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
}

/// Steady heat conduction on the unit square: `sin(πx) sinh(πy) / sinh(π)`.
/// Zero on three sides, `sin(πx)` on `y = 1`.
pub fn heat_exact(x: f64, y: f64) -> f64 {
    heat_value(&[x, y])
}

/// [`heat_exact`] over any scalar type.
pub fn heat_value<T: Scalar>(p: &[T]) -> T {
    (p[0] * PI).sin() * (p[1] * PI).sinh() / PI.sinh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::laplacian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn heat_boundary_values() {
        assert!((heat_exact(0.5, 1.0) - 1.0).abs() < 1e-15);
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            assert_eq!(heat_exact(x, 0.0), 0.0);
            assert!(heat_exact(0.0, x).abs() < 1e-15);
            assert!(heat_exact(1.0, x).abs() < 1e-15);
        }
    }

    #[test]
    fn heat_is_harmonic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = [rng.gen::<f64>(), rng.gen::<f64>()];
            assert!(laplacian(heat_value, &p).unwrap().abs() < 1e-9);
        }
    }
}
