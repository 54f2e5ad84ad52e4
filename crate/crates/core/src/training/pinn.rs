use super::loss::{data_sq, residual_sq};
use super::{Dataset, LossTerms, LossWeights, Problem, Samples, TrainConfig, TrainError, TrainTrace, EpochRecord};
use crate::autodiff::{AutodiffError, FieldJet, JetOrder};
use crate::harness::derive_seed;
use crate::mlp::{AdamState, JetWorkspace, MlpModel};

/// Mean squared error of the observed components over `eval`.
pub fn mlp_eval_mse(net: &MlpModel, problem: &Problem, eval: &Dataset) -> f64 {
    let n_obs = problem.data_outputs();
    let mut cache = net.new_jet_cache(0, JetOrder::Value);
    let mut s = 0.0;
    for (x, y) in eval.points.iter().zip(&eval.values) {
        let jet = net.jet_forward(x, &mut cache);
        for o in 0..n_obs {
            let d = jet.value[o] - y[o];
            s += d * d;
        }
    }
    s / (eval.len() * n_obs).max(1) as f64
}

fn value_adjoint(n_out: usize, adj: &[f64], scale: f64) -> FieldJet<f64> {
    let mut value = vec![0.0; n_out];
    for (v, a) in value.iter_mut().zip(adj) {
        *v = a * scale;
    }
    FieldJet { dims: 0, order: JetOrder::Value, value, grad: vec![], diag: vec![] }
}

/// Loss terms and full parameter gradient of a standard PINN.
pub(crate) fn pinn_loss_grad(
    net: &MlpModel,
    problem: &Problem,
    samples: &Samples,
    w: LossWeights,
) -> Result<(LossTerms, Vec<f64>), AutodiffError> {
    let mut grad = vec![0.0; net.param_count()];
    let mut ws = JetWorkspace::default();
    let mut terms = LossTerms::default();
    let n_obs = problem.data_outputs();
    let n_out = net.output_dim();
    let data = &samples.data;
    if !data.is_empty() {
        let mut cache = net.new_jet_cache(0, JetOrder::Value);
        let scale = w.data / (data.len() * n_obs) as f64;
        let mut adj = vec![0.0; n_obs];
        for (x, y) in data.points.iter().zip(&data.values) {
            let jet = net.jet_forward(x, &mut cache);
            terms.data += data_sq(&jet.value[..n_obs], y, &mut adj);
            if scale > 0.0 {
                net.jet_backward(&cache, &value_adjoint(n_out, &adj, scale), &mut grad, &mut ws);
            }
        }
        terms.data /= (data.len() * n_obs) as f64;
    }
    if w.pde > 0.0 && !samples.colloc.is_empty() {
        let n_res = problem.residual_count();
        let scale = w.pde / (samples.colloc.len() * n_res) as f64;
        let mut cache = net.new_jet_cache(problem.jet_dims(), JetOrder::Laplacian);
        for x in &samples.colloc {
            let jet = net.jet_forward(x, &mut cache);
            let (sq, adj) = residual_sq(problem, x, &jet)?;
            terms.pde += sq;
            net.jet_backward(&cache, &adj.map(|a| a * scale), &mut grad, &mut ws);
        }
        terms.pde /= (samples.colloc.len() * n_res) as f64;
    }
    terms.total = w.data * terms.data + w.pde * terms.pde;
    Ok((terms, grad))
}

/// Standard PINN with freshly drawn samples.
pub fn train_pinn(cfg: &TrainConfig, problem: &Problem) -> Result<(MlpModel, TrainTrace), TrainError> {
    let samples = Samples::generate(problem, cfg)?;
    train_pinn_on(cfg, problem, &samples)
}

/// Full-batch Adam on the composite loss for `cfg.max_epochs` epochs, or
/// until the eval MSE reaches `cfg.mse_target`.
pub fn train_pinn_on(cfg: &TrainConfig, problem: &Problem, samples: &Samples) -> Result<(MlpModel, TrainTrace), TrainError> {
    cfg.validate()?;
    let mut sizes = vec![problem.input_dim()];
    sizes.extend(&cfg.hidden);
    sizes.push(problem.pinn_outputs());
    let mut net = MlpModel::init(&sizes, cfg.activation, derive_seed(cfg.seed, "pinn-init", 0))?;
    let mut adam = AdamState::new(net.param_count(), cfg.lr);
    let target = cfg.active_target();
    let mut trace = TrainTrace { initial_mse: mlp_eval_mse(&net, problem, &samples.eval), ..Default::default() };
    if target.is_some_and(|t| trace.initial_mse <= t) {
        trace.stop_epoch = Some(0);
        return Ok((net, trace));
    }
    for epoch in 1..=cfg.max_epochs {
        let diverged = |reason: String, trace: &TrainTrace| TrainError::Diverged {
            epoch,
            reason,
            trace: Box::new(trace.clone()),
        };
        let (terms, grad) =
            pinn_loss_grad(&net, problem, samples, cfg.weights()).map_err(|e| diverged(e.to_string(), &trace))?;
        if !terms.total.is_finite() {
            return Err(diverged(format!("non-finite loss {}", terms.total), &trace));
        }
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        adam.step(&mut net.params, &grad).map_err(|e| diverged(e.to_string(), &trace))?;
        let eval_mse = mlp_eval_mse(&net, problem, &samples.eval);
        trace.records.push(EpochRecord {
            epoch,
            total_loss: terms.total,
            pde_loss: terms.pde,
            data_loss: terms.data,
            eval_mse,
            grad_norm,
        });
        if target.is_some_and(|t| eval_mse <= t) {
            trace.stop_epoch = Some(epoch);
            break;
        }
    }
    Ok((net, trace))
}
