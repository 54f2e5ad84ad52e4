use serde::{Deserialize, Serialize};

use super::{Dataset, Problem, TrainError};
use crate::autodiff::{AutodiffError, FieldJet, HyperDual, JetOrder, Scalar, Tape};
use crate::mlp::MlpModel;
use crate::trefftz::TrefftzExpansion;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub pde: f64,
    pub data: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { pde: 1.0, data: 1.0 }
    }
}

/// `total = data·mean((u − y)²) + pde·mean(r²)`, means over samples and components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossTerms {
    pub total: f64,
    pub pde: f64,
    pub data: f64,
}

/// Anything that can report value, gradient and diagonal curvature jets.
pub trait JetModel {
    fn jet(&self, x: &[f64], dims: usize, order: JetOrder) -> FieldJet<f64>;
}

impl JetModel for MlpModel {
    fn jet(&self, x: &[f64], dims: usize, order: JetOrder) -> FieldJet<f64> {
        let mut cache = self.new_jet_cache(dims, order);
        self.jet_forward(x, &mut cache)
    }
}

impl JetModel for TrefftzExpansion {
    fn jet(&self, x: &[f64], dims: usize, order: JetOrder) -> FieldJet<f64> {
        TrefftzExpansion::jet(self, x, dims, order).expect("expansion jet")
    }
}

/// The exact solution of a problem, in the PINN output layout.
pub struct ExactModel<'a>(pub &'a Problem);

impl JetModel for ExactModel<'_> {
    fn jet(&self, x: &[f64], dims: usize, order: JetOrder) -> FieldJet<f64> {
        FieldJet::from_field(|p: &[HyperDual]| self.0.exact_generic(p), x, dims, order).expect("smooth exact field")
    }
}

/// `Σ_c r_c²` at one collocation point and its derivative with respect to
/// every jet entry, obtained by recording the residual operator on a tape
/// whose inputs are the jet entries.
pub(crate) fn residual_sq(problem: &Problem, x: &[f64], jet: &FieldJet<f64>) -> Result<(f64, FieldJet<f64>), AutodiffError> {
    let tape = Tape::with_capacity(64);
    let leaves = jet.map(|v| tape.input(v));
    let r = problem.residual(x, &leaves);
    let mut sq = r[0] * r[0];
    for v in &r[1..] {
        sq = sq + *v * *v;
    }
    let adj = tape.gradient(sq)?;
    Ok((sq.value(), leaves.map(|v| adj.wrt(v))))
}

/// `Σ_o (u_o − y_o)²` over the observed components and `∂/∂u_o`.
pub(crate) fn data_sq(values: &[f64], target: &[f64], adj: &mut [f64]) -> f64 {
    let mut s = 0.0;
    for (o, (&u, &y)) in values.iter().zip(target).enumerate() {
        let d = u - y;
        s += d * d;
        adj[o] = 2.0 * d;
    }
    s
}

/// Composite PINN loss of `model` on `data` and `colloc`.
pub fn pinn_loss<M: JetModel + ?Sized>(
    model: &M,
    problem: &Problem,
    data: &Dataset,
    colloc: &[Vec<f64>],
    weights: LossWeights,
) -> Result<LossTerms, TrainError> {
    if data.is_empty() && colloc.is_empty() {
        return Err(TrainError::EmptyLoss);
    }
    let n_obs = problem.data_outputs();
    let mut terms = LossTerms::default();
    if !data.is_empty() {
        let mut adj = vec![0.0; n_obs];
        for (x, y) in data.points.iter().zip(&data.values) {
            let jet = model.jet(x, problem.jet_dims(), JetOrder::Value);
            terms.data += data_sq(&jet.value[..n_obs], y, &mut adj);
        }
        terms.data /= (data.len() * n_obs) as f64;
    }
    if !colloc.is_empty() {
        for x in colloc {
            let jet = model.jet(x, problem.jet_dims(), JetOrder::Laplacian);
            if jet.outputs() < problem.pinn_outputs() {
                return Err(TrainError::DimensionMismatch { expected: problem.pinn_outputs(), got: jet.outputs() });
            }
            terms.pde += residual_sq(problem, x, &jet)?.0;
        }
        terms.pde /= (colloc.len() * problem.residual_count()) as f64;
    }
    terms.total = weights.data * terms.data + weights.pde * terms.pde;
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::Activation;
    use crate::physics::HelicalFieldConfig;

    struct Zero;
    impl JetModel for Zero {
        fn jet(&self, _: &[f64], dims: usize, order: JetOrder) -> FieldJet<f64> {
            let n = if order == JetOrder::Value { 0 } else { dims };
            FieldJet {
                dims,
                order,
                value: vec![0.0],
                grad: vec![0.0; n],
                diag: vec![0.0; if order == JetOrder::Laplacian { dims } else { 0 }],
            }
        }
    }

    #[test]
    fn exact_model_has_vanishing_terms() {
        for problem in [Problem::Heat, Problem::Helical(HelicalFieldConfig::default())] {
            let mut rng = crate::harness::rng_for(4, "t", 0);
            let pts: Vec<Vec<f64>> = (0..50).map(|_| problem.sample_interior(&mut rng)).collect();
            let data = Dataset::exact(&problem, pts.clone());
            let t = pinn_loss(&ExactModel(&problem), &problem, &data, &pts, LossWeights::default()).unwrap();
            assert!(t.pde < 1e-12 && t.data < 1e-12, "{t:?}");
        }
    }

    #[test]
    fn two_point_data_term() {
        let data = Dataset { points: vec![vec![0.5, 0.5]; 2], values: vec![vec![1.0], vec![3.0]] };
        let t = pinn_loss(&Zero, &Problem::Heat, &data, &[], LossWeights::default()).unwrap();
        assert_eq!(t.data, 5.0);
        assert_eq!(t.total, 5.0);
    }

    #[test]
    fn zero_pde_weight_is_supervised_mse() {
        let net = MlpModel::init(&[2, 8, 1], Activation::Tanh, 1).unwrap();
        let data = Dataset::exact(&Problem::Heat, vec![vec![0.2, 0.3], vec![0.7, 0.9]]);
        let colloc = vec![vec![0.4, 0.4]];
        let t = pinn_loss(&net, &Problem::Heat, &data, &colloc, LossWeights { pde: 0.0, data: 1.0 }).unwrap();
        let mse = data
            .points
            .iter()
            .zip(&data.values)
            .map(|(p, y)| (net.predict(p).unwrap()[0] - y[0]).powi(2))
            .sum::<f64>()
            / 2.0;
        assert!((t.total - mse).abs() < 1e-15);
        assert!(t.pde > 0.0);
    }

    #[test]
    fn empty_sets_rejected() {
        let r = pinn_loss(&Zero, &Problem::Heat, &Dataset::default(), &[], LossWeights::default());
        assert!(matches!(r, Err(TrainError::EmptyLoss)));
    }

    #[test]
    fn residual_adjoint_matches_finite_differences() {
        let problem = Problem::TaylorGreen(Default::default());
        let jet = FieldJet {
            dims: 2,
            order: JetOrder::Laplacian,
            value: vec![0.3, -0.2, 0.1],
            grad: vec![0.5, -0.4, 0.2, 0.7, -0.1, 0.3],
            diag: vec![0.05, -0.02, 0.3, 0.1, 0.0, 0.2],
        };
        let x = [1.0, 2.0];
        let (_, adj) = residual_sq(&problem, &x, &jet).unwrap();
        let h = 1e-6;
        let f = |j: &FieldJet<f64>| residual_sq(&problem, &x, j).unwrap().0;
        for i in 0..3 {
            let (mut a, mut b) = (jet.clone(), jet.clone());
            a.value[i] += h;
            b.value[i] -= h;
            let fd = (f(&a) - f(&b)) / (2.0 * h);
            assert!((fd - adj.value[i]).abs() < 1e-4 * (1.0 + fd.abs()));
        }
        for i in 0..6 {
            let (mut a, mut b) = (jet.clone(), jet.clone());
            a.grad[i] += h;
            b.grad[i] -= h;
            let fd = (f(&a) - f(&b)) / (2.0 * h);
            assert!((fd - adj.grad[i]).abs() < 1e-4 * (1.0 + fd.abs()));
            let (mut a, mut b) = (jet.clone(), jet.clone());
            a.diag[i] += h;
            b.diag[i] -= h;
            let fd = (f(&a) - f(&b)) / (2.0 * h);
            assert!((fd - adj.diag[i]).abs() < 1e-4 * (1.0 + fd.abs()));
        }
    }
}
