//! Basis families whose members satisfy the governing equation exactly, and
//! the expansion `u(x) = Σ cᵢ φᵢ(x) + u_NN(x)` built on them.

mod basis;
mod bessel;
mod expansion;
mod fit;

pub use basis::{eval_basis, BasisFamily, BasisSpec, BasisTerm, MAX_HELICAL_ORDER};
pub use bessel::{bessel_i, bessel_i_prime, reduced_bessel_i, MAX_ARGUMENT, MAX_ORDER};
pub use expansion::TrefftzExpansion;
pub use fit::{fit_coeffs, MAX_CONDITION};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrefftzError {
    #[error("Bessel order {0} exceeds the supported maximum {max}", max = MAX_ORDER)]
    BesselOrder(u32),
    #[error("Bessel argument must be non-negative, got {0}")]
    BesselNegative(f64),
    #[error("Bessel argument {0} exceeds the supported range [0, {max}]", max = MAX_ARGUMENT)]
    BesselRange(f64),
    #[error("basis index {index} out of range for count {count}")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("point has dimension {got}, basis expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coefficient vector has length {got}, basis count is {expected}")]
    CoeffLength { expected: usize, got: usize },
    #[error("need at least {needed} samples to fit, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("basis matrix is rank deficient (condition estimate {condition:e})")]
    RankDeficient { condition: f64 },
    #[error("invalid basis spec: {0}")]
    InvalidSpec(String),
}
