use nalgebra::{DMatrix, DVector};

use super::{eval_basis, BasisSpec, TrefftzError};

/// Basis matrices with a 2-norm condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Rows are `(sample, component)` pairs, columns are basis functions.
fn design_matrix(spec: &BasisSpec, points: &[Vec<f64>]) -> Result<DMatrix<f64>, TrefftzError> {
    let n_out = spec.outputs();
    let mut a = DMatrix::zeros(points.len() * n_out, spec.count);
    let mut phi = vec![0.0; n_out];
    for (j, p) in points.iter().enumerate() {
        for i in 0..spec.count {
            eval_basis(spec, i, p, &mut phi)?;
            for o in 0..n_out {
                a[(j * n_out + o, i)] = phi[o];
            }
        }
    }
    Ok(a)
}

/// Least-squares coefficients minimizing `Σ_j |Σ_i cᵢ φᵢ(x_j) − y_j|²`.
///
/// Solved by SVD. A condition number above [`MAX_CONDITION`] is reported as
/// rank deficiency rather than silently truncated.
pub fn fit_coeffs(spec: &BasisSpec, points: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<Vec<f64>, TrefftzError> {
    spec.validate()?;
    if points.len() < spec.count {
        return Err(TrefftzError::TooFewSamples { needed: spec.count, got: points.len() });
    }
    let n_out = spec.outputs();
    if targets.len() != points.len() {
        return Err(TrefftzError::DimensionMismatch { expected: points.len(), got: targets.len() });
    }
    if let Some(t) = targets.iter().find(|t| t.len() != n_out) {
        return Err(TrefftzError::DimensionMismatch { expected: n_out, got: t.len() });
    }
    let a = design_matrix(spec, points)?;
    let b = DVector::from_iterator(points.len() * n_out, targets.iter().flatten().copied());
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(TrefftzError::RankDeficient { condition });
    }
    let c = svd
        .solve(&b, 0.0)
        .map_err(|e| TrefftzError::InvalidSpec(e.to_string()))?;
    Ok(c.iter().copied().collect())
}
