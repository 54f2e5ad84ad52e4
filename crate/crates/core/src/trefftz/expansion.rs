use serde::{Deserialize, Serialize};

use super::{eval_basis, BasisFamily, BasisSpec, TrefftzError};
use crate::autodiff::{FieldJet, HyperDual, JetOrder, Scalar};
use crate::mlp::MlpModel;

/// `u(x) = Σ cᵢ φᵢ(x) + u_NN(x)`.
///
/// For the Taylor–Green family the residual network is a stream function
/// `ψ_NN` and contributes its curl `(−∂ψ/∂y, ∂ψ/∂x)`, so the whole model stays
/// divergence-free.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrefftzExpansion {
    pub spec: BasisSpec,
    pub coeffs: Vec<f64>,
    pub residual_net: Option<MlpModel>,
}

impl TrefftzExpansion {
    pub fn new(spec: BasisSpec, coeffs: Vec<f64>, residual_net: Option<MlpModel>) -> Result<Self, TrefftzError> {
        spec.validate()?;
        if coeffs.len() != spec.count {
            return Err(TrefftzError::CoeffLength { expected: spec.count, got: coeffs.len() });
        }
        if let Some(net) = &residual_net {
            if net.input_dim() != spec.input_dim() || net.output_dim() != 1 {
                return Err(TrefftzError::InvalidSpec(format!(
                    "residual net maps {} -> {}, expected {} -> 1",
                    net.input_dim(),
                    net.output_dim(),
                    spec.input_dim()
                )));
            }
        }
        Ok(Self { spec, coeffs, residual_net })
    }

    /// Zero coefficients, no network.
    pub fn zeros(spec: BasisSpec) -> Result<Self, TrefftzError> {
        let n = spec.count;
        Self::new(spec, vec![0.0; n], None)
    }

    pub fn outputs(&self) -> usize {
        self.spec.outputs()
    }

    fn check_point(&self, got: usize) -> Result<(), TrefftzError> {
        let expected = self.spec.input_dim();
        if got != expected {
            return Err(TrefftzError::DimensionMismatch { expected, got });
        }
        Ok(())
    }

    fn check_coeffs(&self) -> Result<(), TrefftzError> {
        if self.coeffs.len() != self.spec.count {
            return Err(TrefftzError::CoeffLength { expected: self.spec.count, got: self.coeffs.len() });
        }
        Ok(())
    }

    /// `Σ cᵢ φᵢ(x)` over any scalar type, one entry per output component.
    pub fn basis_part<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, TrefftzError> {
        self.check_coeffs()?;
        self.check_point(x.len())?;
        let zero = x[0] * 0.0;
        let n_out = self.outputs();
        let mut acc = vec![zero; n_out];
        let mut phi = vec![zero; n_out];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            eval_basis(&self.spec, i, x, &mut phi)?;
            for o in 0..n_out {
                acc[o] = acc[o] + phi[o] * c;
            }
        }
        Ok(acc)
    }

    /// Full model value for harmonic (scalar) families over any scalar type.
    pub fn eval_scalar<T: Scalar>(&self, x: &[T]) -> Result<T, TrefftzError> {
        if self.spec.family == BasisFamily::TgStreamfunction {
            return Err(TrefftzError::InvalidSpec("eval_scalar on a vector-valued family".into()));
        }
        let mut v = self.basis_part(x)?[0];
        if let Some(net) = &self.residual_net {
            v = v + net.forward(x).expect("net shape checked at construction")[0];
        }
        Ok(v)
    }

    /// Model value at `x`: one component for harmonic families, `(u, v)` for Taylor–Green.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, TrefftzError> {
        let mut out = self.basis_part(x)?;
        if let Some(net) = &self.residual_net {
            if self.spec.family == BasisFamily::TgStreamfunction {
                let psi = net.forward(&HyperDual::seed(x, 0, 1)).expect("net shape")[0];
                out[0] -= psi.e2;
                out[1] += psi.e1;
            } else {
                out[0] += net.predict(x).expect("net shape")[0];
            }
        }
        Ok(out)
    }

    /// `∂u/∂x + ∂v/∂y` of a Taylor–Green expansion. The network part enters
    /// as `−ψ_yx + ψ_xy` computed from one mixed hyper-dual pass, so it
    /// cancels identically.
    pub fn divergence(&self, x: &[f64]) -> Result<f64, TrefftzError> {
        if self.spec.family != BasisFamily::TgStreamfunction {
            return Err(TrefftzError::InvalidSpec("divergence of a scalar family".into()));
        }
        let basis = self.basis_part(&HyperDual::seed(x, 0, 1))?;
        let mut div = basis[0].e1 + basis[1].e2;
        if let Some(net) = &self.residual_net {
            let psi = net.forward(&HyperDual::seed(x, 0, 1)).expect("net shape")[0];
            div += -psi.e12 + psi.e12;
        }
        Ok(div)
    }

    /// Jet of the model over the leading `dims` coordinates. Taylor–Green
    /// expansions support value order only.
    pub fn jet(&self, x: &[f64], dims: usize, order: JetOrder) -> Result<FieldJet<f64>, TrefftzError> {
        self.check_point(x.len())?;
        if self.spec.family == BasisFamily::TgStreamfunction {
            if order != JetOrder::Value {
                return Err(TrefftzError::InvalidSpec("Taylor–Green jets carry values only".into()));
            }
            return Ok(FieldJet { dims, order, value: self.eval(x)?, grad: vec![], diag: vec![] });
        }
        self.check_coeffs()?;
        let mut jet = FieldJet::from_field(
            |p: &[HyperDual]| self.basis_part(p).expect("checked"),
            x,
            dims,
            order,
        )
        .map_err(|e| TrefftzError::InvalidSpec(e.to_string()))?;
        if let Some(net) = &self.residual_net {
            let mut cache = net.new_jet_cache(dims, order);
            let nj = net.jet_forward(x, &mut cache);
            jet.value[0] += nj.value[0];
            for (a, b) in jet.grad.iter_mut().zip(&nj.grad) {
                *a += b;
            }
            for (a, b) in jet.diag.iter_mut().zip(&nj.diag) {
                *a += b;
            }
        }
        Ok(jet)
    }
}
