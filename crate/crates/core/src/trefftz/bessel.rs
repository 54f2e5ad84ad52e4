//! Modified Bessel functions of the first kind, integer order.
//!
//! The ascending series `Σ (x/2)^{2k+n} / (k! (k+n)!)` has only positive
//! terms, so summing it directly is accurate to a few ulps over the whole
//! supported range `0 ≤ x ≤ 50`; no recurrence or asymptotic branch is needed.

use super::TrefftzError;

pub const MAX_ORDER: u32 = 20;
pub const MAX_ARGUMENT: f64 = 50.0;

fn check(order: u32, x: f64) -> Result<(), TrefftzError> {
    if order > MAX_ORDER {
        return Err(TrefftzError::BesselOrder(order));
    }
    if x.is_nan() || x < 0.0 {
        return Err(TrefftzError::BesselNegative(x));
    }
    if x > MAX_ARGUMENT {
        return Err(TrefftzError::BesselRange(x));
    }
    Ok(())
}

/// `I_n(x)`.
pub fn bessel_i(order: u32, x: f64) -> Result<f64, TrefftzError> {
    check(order, x)?;
    Ok(series(order, x))
}

/// `I_n'(x) = (I_{n-1}(x) + I_{n+1}(x)) / 2`, with `I_{-1} = I_1`.
pub fn bessel_i_prime(order: u32, x: f64) -> Result<f64, TrefftzError> {
    check(order, x)?;
    let below = if order == 0 { series(1, x) } else { series(order - 1, x) };
    Ok(0.5 * (below + series(order + 1, x)))
}

fn series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / f64::from(k);
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut sum = term;
    let n = f64::from(order);
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + n));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    sum
}

/// `I_n(κ√s) / s^{n/2}` as an entire function of `s ≥ 0`:
/// `(κ/2)^n Σ_k (κ²s/4)^k / (k! (k+n)!)`.
///
/// Its derivative in `s` is `(κ/2)` times the same function at order `n+1`,
/// which lets helical harmonics be written smoothly through the axis.
pub fn reduced_bessel_i(order: u32, kappa: f64, s: f64) -> f64 {
    let half = 0.5 * kappa;
    let mut lead = 1.0;
    for k in 1..=order {
        lead *= half / f64::from(k);
    }
    let q = half * half * s;
    let n = f64::from(order);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 0.0;
    while term > sum.abs() * 1e-17 {
        k += 1.0;
        term *= q / (k * (k + n));
        sum += term;
    }
    lead * sum
}
