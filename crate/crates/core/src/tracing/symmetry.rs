use std::f64::consts::TAU;

use super::TracingError;

fn cell_grid(n: usize) -> Result<Vec<f64>, TracingError> {
    if n < 2 {
        return Err(TracingError::BadGrid(n));
    }
    Ok((0..n).map(|i| TAU * (i as f64 + 0.5) / n as f64).collect())
}

/// RMS distance of a periodic planar field from its average over the
/// Taylor–Green reflection group `x → −x`, `y → −y` on an `n × n` grid of
/// the `2π`-periodic box.
///
/// Under `x → −x` the field maps as `(u, v) → (u, −v)`, under `y → −y` as
/// `(u, v) → (−u, v)`; the exact vortex is invariant under both.
pub fn symmetry_error<F>(field: F, n: usize) -> Result<f64, TracingError>
where
    F: Fn(f64, f64) -> [f64; 2],
{
    let g = cell_grid(n)?;
    let mut s = 0.0;
    for &x in &g {
        for &y in &g {
            let a = field(x, y);
            let b = field(TAU - x, y);
            let c = field(x, TAU - y);
            let d = field(TAU - x, TAU - y);
            let ub = 0.25 * (a[0] + b[0] - c[0] - d[0]);
            let vb = 0.25 * (a[1] - b[1] + c[1] - d[1]);
            s += (a[0] - ub).powi(2) + (a[1] - vb).powi(2);
        }
    }
    Ok((s / (n * n) as f64).sqrt())
}

/// RMS of a divergence function over an `n × n` grid of the periodic box.
pub fn rms_divergence<F>(div: F, n: usize) -> Result<f64, TracingError>
where
    F: Fn(f64, f64) -> f64,
{
    let g = cell_grid(n)?;
    let s: f64 = g.iter().flat_map(|&x| g.iter().map(move |&y| (x, y))).map(|(x, y)| div(x, y).powi(2)).sum();
    Ok((s / (n * n) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tg(x: f64, y: f64) -> [f64; 2] {
        [x.cos() * y.sin(), -x.sin() * y.cos()]
    }

    #[test]
    fn exact_vortex_is_symmetric() {
        assert!(symmetry_error(tg, 32).unwrap() < 1e-14);
    }

    #[test]
    fn uniform_drift_is_fully_asymmetric() {
        let e = symmetry_error(|x, y| [tg(x, y)[0] + 0.1, tg(x, y)[1]], 16).unwrap();
        assert!((e - 0.1).abs() < 1e-12, "{e}");
    }

    #[test]
    fn divergence_rms() {
        assert!((rms_divergence(|_, _| 0.5, 8).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(rms_divergence(|_, _| 0.0, 1), Err(TracingError::BadGrid(1)));
    }
}
