use serde::{Deserialize, Serialize};

use super::MlpError;

/// Adam optimizer state with bias correction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One update of `params` in place. A non-finite gradient leaves both
    /// parameters and state untouched.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<(), MlpError> {
        if grad.len() != params.len() || self.m.len() != params.len() {
            return Err(MlpError::ParamLength { expected: params.len(), got: grad.len() });
        }
        if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
            return Err(MlpError::NonFiniteGradient { index, step: self.t + 1 });
        }
        self.t += 1;
        let t = self.t as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        for g in [0.5, -3.0, 1e-3] {
            let mut p = [1.0];
            let mut s = AdamState::new(1, 1e-3);
            s.step(&mut p, &[g]).unwrap();
            let moved = 1.0 - p[0];
            let expected = 1e-3 * g.signum();
            assert!(((moved - expected) / expected).abs() <= 1e-8 / g.abs() * 1.01);
        }
    }

    #[test]
    fn zero_gradient_keeps_params() {
        let mut p = [0.7, -0.2];
        let mut s = AdamState::new(2, 1e-3);
        s.step(&mut p, &[0.0, 0.0]).unwrap();
        assert_eq!(p, [0.7, -0.2]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn converges_on_scalar_quadratic() {
        // loss (θ-5)², 100 steps from 0 at lr 0.1; a scalar reference run
        // of the same update ends at θ = 5.039004031...
        let mut p = [0.0];
        let mut s = AdamState::new(1, 0.1);
        for _ in 0..100 {
            let g = 2.0 * (p[0] - 5.0);
            s.step(&mut p, &[g]).unwrap();
        }
        assert!((p[0] - 5.0).abs() < 0.5, "theta = {}", p[0]);
        assert!((p[0] - 5.039_004_031_223_92).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let mut p = [1.0, 2.0];
        let mut s = AdamState::new(2, 1e-3);
        let err = s.step(&mut p, &[0.1, f64::NAN]).unwrap_err();
        assert_eq!(err, MlpError::NonFiniteGradient { index: 1, step: 1 });
        assert_eq!(p, [1.0, 2.0]);
        assert_eq!(s.t, 0);
    }
}
