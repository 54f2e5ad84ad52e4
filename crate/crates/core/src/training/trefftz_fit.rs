use super::loss::{data_sq, residual_sq};
use super::{CoeffOptimizer, Dataset, EpochRecord, LossTerms, Problem, Samples, TrainConfig, TrainError, TrainTrace};
use crate::autodiff::{AutodiffError, FieldJet, HyperDual, JetOrder};
use crate::harness::derive_seed;
use crate::mlp::{AdamState, JetCache, JetWorkspace, MlpModel};
use nalgebra::{DMatrix, DVector};

use crate::trefftz::{eval_basis, fit_coeffs, BasisFamily, BasisSpec, TrefftzExpansion};

/// Basis values (and, at collocation points, full jets) precomputed once per
/// run; the basis never changes during training.
struct BasisTables {
    n_out: usize,
    channels: usize,
    data: Vec<f64>,
    eval: Vec<f64>,
    colloc: Vec<f64>,
}

fn value_table(spec: &BasisSpec, points: &[Vec<f64>]) -> Result<Vec<f64>, TrainError> {
    let n_out = spec.outputs();
    let mut t = Vec::with_capacity(points.len() * spec.count * n_out);
    let mut phi = vec![0.0; n_out];
    for p in points {
        for i in 0..spec.count {
            eval_basis(spec, i, p, &mut phi)?;
            t.extend_from_slice(&phi);
        }
    }
    Ok(t)
}

fn jet_table(spec: &BasisSpec, points: &[Vec<f64>], dims: usize) -> Result<Vec<f64>, TrainError> {
    let mut t = Vec::new();
    for p in points {
        for i in 0..spec.count {
            let jet = FieldJet::from_field(
                |x: &[HyperDual]| {
                    let mut out = [HyperDual::default()];
                    eval_basis(spec, i, x, &mut out).expect("validated spec");
                    vec![out[0]]
                },
                p,
                dims,
                JetOrder::Laplacian,
            )?;
            t.push(jet.value[0]);
            t.extend_from_slice(&jet.grad);
            t.extend_from_slice(&jet.diag);
        }
    }
    Ok(t)
}

/// The network's contribution to the observed components at one point.
/// Harmonic families add the net value; Taylor–Green adds the curl of the
/// net stream function.
struct NetPart<'a> {
    net: &'a MlpModel,
    family: BasisFamily,
}

impl NetPart<'_> {
    fn cache(&self) -> JetCache {
        match self.family {
            BasisFamily::TgStreamfunction => self.net.new_jet_cache(2, JetOrder::Gradient),
            _ => self.net.new_jet_cache(0, JetOrder::Value),
        }
    }

    fn add(&self, x: &[f64], cache: &mut JetCache, v: &mut [f64]) {
        let jet = self.net.jet_forward(x, cache);
        match self.family {
            BasisFamily::TgStreamfunction => {
                v[0] -= jet.d(0, 1);
                v[1] += jet.d(0, 0);
            }
            _ => v[0] += jet.value[0],
        }
    }

    fn backward(&self, cache: &JetCache, adj: &[f64], grad: &mut [f64], ws: &mut JetWorkspace) {
        let out = match self.family {
            BasisFamily::TgStreamfunction => FieldJet {
                dims: 2,
                order: JetOrder::Gradient,
                value: vec![0.0],
                grad: vec![adj[1], -adj[0]],
                diag: vec![],
            },
            _ => FieldJet { dims: 0, order: JetOrder::Value, value: vec![adj[0]], grad: vec![], diag: vec![] },
        };
        self.net.jet_backward(cache, &out, grad, ws);
    }
}

/// Pseudo-inverse of the coefficient Hessian of the data term, or `None`
/// when there is no data term.
fn gauss_newton_preconditioner(tables: &BasisTables, nb: usize, n_data: usize, cfg: &TrainConfig) -> Option<DMatrix<f64>> {
    if n_data == 0 || cfg.lambda_data == 0.0 {
        return None;
    }
    let rows = n_data * tables.n_out;
    let a = DMatrix::from_fn(rows, nb, |r, i| {
        let (j, o) = (r / tables.n_out, r % tables.n_out);
        tables.data[(j * nb + i) * tables.n_out + o]
    });
    let h = a.transpose() * a * (2.0 * cfg.lambda_data / rows as f64);
    let svd = h.svd(true, true);
    let tol = 1e-12 * svd.singular_values.max();
    svd.pseudo_inverse(tol).ok()
}

fn part(net: &Option<MlpModel>, family: BasisFamily) -> Option<NetPart<'_>> {
    net.as_ref().map(|n| NetPart { net: n, family })
}

fn combine(coeffs: &[f64], table: &[f64], j: usize, width: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let row = &table[j * coeffs.len() * width..(j + 1) * coeffs.len() * width];
    for (i, &c) in coeffs.iter().enumerate() {
        for (o, v) in out.iter_mut().enumerate() {
            *v += c * row[i * width + o];
        }
    }
}

fn eval_mse_tables(coeffs: &[f64], net: Option<&NetPart>, tables: &BasisTables, eval: &Dataset) -> f64 {
    let n_out = tables.n_out;
    let mut v = vec![0.0; n_out];
    let mut cache = net.map(|n| n.cache());
    let mut s = 0.0;
    for (j, (x, y)) in eval.points.iter().zip(&eval.values).enumerate() {
        combine(coeffs, &tables.eval, j, n_out, &mut v);
        if let (Some(n), Some(c)) = (net, cache.as_mut()) {
            n.add(x, c, &mut v);
        }
        for o in 0..n_out {
            s += (v[o] - y[o]).powi(2);
        }
    }
    s / (eval.len() * n_out).max(1) as f64
}

/// Eval MSE of a Trefftz expansion against exact values.
pub fn expansion_eval_mse(model: &TrefftzExpansion, eval: &Dataset) -> Result<f64, TrainError> {
    let mut s = 0.0;
    let n_out = model.outputs();
    for (x, y) in eval.points.iter().zip(&eval.values) {
        let v = model.eval(x)?;
        for o in 0..n_out {
            s += (v[o] - y[o]).powi(2);
        }
    }
    Ok(s / (eval.len() * n_out).max(1) as f64)
}

struct Grads {
    coeffs: Vec<f64>,
    net: Vec<f64>,
}

fn loss_grad(
    coeffs: &[f64],
    net: Option<&NetPart>,
    problem: &Problem,
    samples: &Samples,
    tables: &BasisTables,
    cfg: &TrainConfig,
) -> Result<(LossTerms, Grads), AutodiffError> {
    let w = cfg.weights();
    let n_out = tables.n_out;
    let nb = coeffs.len();
    let mut g = Grads { coeffs: vec![0.0; nb], net: vec![0.0; net.map_or(0, |n| n.net.param_count())] };
    let mut ws = JetWorkspace::default();
    let mut terms = LossTerms::default();
    let data = &samples.data;
    if !data.is_empty() {
        let scale = w.data / (data.len() * n_out) as f64;
        let mut cache = net.map(|n| n.cache());
        let (mut v, mut adj) = (vec![0.0; n_out], vec![0.0; n_out]);
        for (j, (x, y)) in data.points.iter().zip(&data.values).enumerate() {
            combine(coeffs, &tables.data, j, n_out, &mut v);
            if let (Some(n), Some(c)) = (net, cache.as_mut()) {
                n.add(x, c, &mut v);
            }
            terms.data += data_sq(&v, y, &mut adj);
            adj.iter_mut().for_each(|a| *a *= scale);
            let row = &tables.data[j * nb * n_out..(j + 1) * nb * n_out];
            for i in 0..nb {
                for o in 0..n_out {
                    g.coeffs[i] += adj[o] * row[i * n_out + o];
                }
            }
            if let (Some(n), Some(c)) = (net, cache.as_ref()) {
                n.backward(c, &adj, &mut g.net, &mut ws);
            }
        }
        terms.data /= (data.len() * n_out) as f64;
    }
    // Taylor–Green expansions are divergence-free by construction and carry no
    // pressure, so only harmonic families see a residual term; there it acts
    // on the network part alone, the basis part being exactly harmonic.
    let residual_active = w.pde > 0.0 && !samples.colloc.is_empty() && tables.channels > 0;
    if residual_active {
        let dims = problem.jet_dims();
        let ch = tables.channels;
        let scale = w.pde / (samples.colloc.len() * problem.residual_count()) as f64;
        let mut cache = net.map(|n| n.net.new_jet_cache(dims, JetOrder::Laplacian));
        let mut flat = vec![0.0; ch];
        for (j, x) in samples.colloc.iter().enumerate() {
            combine(coeffs, &tables.colloc, j, ch, &mut flat);
            let mut jet = FieldJet {
                dims,
                order: JetOrder::Laplacian,
                value: vec![flat[0]],
                grad: flat[1..1 + dims].to_vec(),
                diag: flat[1 + dims..].to_vec(),
            };
            if let (Some(n), Some(c)) = (net, cache.as_mut()) {
                let nj = n.net.jet_forward(x, c);
                jet.value[0] += nj.value[0];
                jet.grad.iter_mut().zip(&nj.grad).for_each(|(a, b)| *a += b);
                jet.diag.iter_mut().zip(&nj.diag).for_each(|(a, b)| *a += b);
            }
            let (sq, adj) = residual_sq(problem, x, &jet)?;
            terms.pde += sq;
            let adj = adj.map(|a| a * scale);
            let row = &tables.colloc[j * nb * ch..(j + 1) * nb * ch];
            for i in 0..nb {
                let phi = &row[i * ch..(i + 1) * ch];
                let mut acc = adj.value[0] * phi[0];
                for k in 0..dims {
                    acc += adj.grad[k] * phi[1 + k] + adj.diag[k] * phi[1 + dims + k];
                }
                g.coeffs[i] += acc;
            }
            if let (Some(n), Some(c)) = (net, cache.as_ref()) {
                n.net.jet_backward(c, &adj, &mut g.net, &mut ws);
            }
        }
        terms.pde /= (samples.colloc.len() * problem.residual_count()) as f64;
    }
    terms.total = w.data * terms.data + w.pde * terms.pde;
    Ok((terms, g))
}

fn check_compatible(problem: &Problem, spec: &BasisSpec) -> Result<(), TrainError> {
    let ok = matches!(
        (problem, spec.family),
        (Problem::Helical(_), BasisFamily::HelicalHarmonic)
            | (Problem::Heat, BasisFamily::PlanarHarmonic)
            | (Problem::TaylorGreen(_), BasisFamily::TgStreamfunction)
    );
    if !ok {
        return Err(TrainError::InvalidConfig(format!(
            "basis family {:?} does not solve the {} problem",
            spec.family,
            problem.tag()
        )));
    }
    Ok(())
}

/// Trefftz-PINN with freshly drawn samples.
pub fn train_trefftz(
    cfg: &TrainConfig,
    problem: &Problem,
    spec: &BasisSpec,
) -> Result<(TrefftzExpansion, TrainTrace), TrainError> {
    let samples = Samples::generate(problem, cfg)?;
    train_trefftz_on(cfg, problem, spec, &samples)
}

/// Jointly optimizes the coefficients and the residual network on the same
/// composite loss as the standard PINN. The network always uses Adam; the
/// coefficients follow `cfg.coeff_optimizer`.
pub fn train_trefftz_on(
    cfg: &TrainConfig,
    problem: &Problem,
    spec: &BasisSpec,
    samples: &Samples,
) -> Result<(TrefftzExpansion, TrainTrace), TrainError> {
    cfg.validate()?;
    spec.validate()?;
    check_compatible(problem, spec)?;
    let mut trace = TrainTrace::default();

    let mut coeffs = vec![0.0; spec.count];
    if cfg.warm_start {
        match fit_coeffs(spec, &samples.data.points, &samples.data.values) {
            Ok(c) => coeffs = c,
            Err(e) => trace.warnings.push(format!("warm start skipped: {e}")),
        }
    }
    let mut net = if cfg.trefftz_hidden.is_empty() {
        None
    } else {
        let mut sizes = vec![spec.input_dim()];
        sizes.extend(&cfg.trefftz_hidden);
        sizes.push(1);
        let mut n = MlpModel::init(&sizes, cfg.activation, derive_seed(cfg.seed, "trefftz-init", 0))?;
        n.zero_output_layer();
        Some(n)
    };

    let harmonic = spec.family != BasisFamily::TgStreamfunction;
    let tables = BasisTables {
        n_out: spec.outputs(),
        channels: if harmonic { 1 + 2 * problem.jet_dims() } else { 0 },
        data: value_table(spec, &samples.data.points)?,
        eval: value_table(spec, &samples.eval.points)?,
        colloc: if harmonic && cfg.lambda_pde > 0.0 {
            jet_table(spec, &samples.colloc, problem.jet_dims())?
        } else {
            Vec::new()
        },
    };
    let tables = BasisTables { channels: if tables.colloc.is_empty() { 0 } else { tables.channels }, ..tables };

    let mut adam_c = AdamState::new(spec.count, cfg.coeff_lr);
    let precond = match cfg.coeff_optimizer {
        CoeffOptimizer::GaussNewton => gauss_newton_preconditioner(&tables, spec.count, samples.data.len(), cfg),
        CoeffOptimizer::Adam => None,
    };
    let mut adam_n = net.as_ref().map(|n| AdamState::new(n.param_count(), cfg.trefftz_lr));
    let family = spec.family;

    let target = cfg.active_target();
    trace.initial_mse = eval_mse_tables(&coeffs, part(&net, family).as_ref(), &tables, &samples.eval);
    if target.is_some_and(|t| trace.initial_mse <= t) {
        trace.stop_epoch = Some(0);
    } else {
        for epoch in 1..=cfg.max_epochs {
            let diverged = |reason: String, trace: &TrainTrace| TrainError::Diverged {
                epoch,
                reason,
                trace: Box::new(trace.clone()),
            };
            let (terms, g) = loss_grad(&coeffs, part(&net, family).as_ref(), problem, samples, &tables, cfg)
                .map_err(|e| diverged(e.to_string(), &trace))?;
            if !terms.total.is_finite() {
                return Err(diverged(format!("non-finite loss {}", terms.total), &trace));
            }
            let grad_norm = g.coeffs.iter().chain(&g.net).map(|v| v * v).sum::<f64>().sqrt();
            match (cfg.coeff_optimizer, &precond) {
                (CoeffOptimizer::GaussNewton, Some(p)) => {
                    let d = p * DVector::from_column_slice(&g.coeffs);
                    for (c, d) in coeffs.iter_mut().zip(d.iter()) {
                        *c -= cfg.coeff_lr * d;
                    }
                }
                (CoeffOptimizer::GaussNewton, None) => {
                    for (c, d) in coeffs.iter_mut().zip(&g.coeffs) {
                        *c -= cfg.coeff_lr * d;
                    }
                }
                (CoeffOptimizer::Adam, _) => adam_c.step(&mut coeffs, &g.coeffs).map_err(|e| diverged(e.to_string(), &trace))?,
            }
            if let (Some(n), Some(a)) = (net.as_mut(), adam_n.as_mut()) {
                a.step(&mut n.params, &g.net).map_err(|e| diverged(e.to_string(), &trace))?;
            }
            let eval_mse = eval_mse_tables(&coeffs, part(&net, family).as_ref(), &tables, &samples.eval);
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
    }
    let model = TrefftzExpansion::new(spec.clone(), coeffs, net)?;
    Ok((model, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::HelicalFieldConfig;

    fn cfg() -> TrainConfig {
        TrainConfig {
            n_data: 40,
            n_collocation: 20,
            max_epochs: 4,
            eval_grid: 7,
            trefftz_hidden: vec![5],
            ..Default::default()
        }
    }

    fn fd_check(problem: &Problem, spec: &BasisSpec, cfg: &TrainConfig) {
        let samples = Samples::generate(problem, cfg).unwrap();
        let coeffs: Vec<f64> = (0..spec.count).map(|i| 0.1 * (i as f64 + 1.0).sin()).collect();
        let mut sizes = vec![spec.input_dim()];
        sizes.extend(&cfg.trefftz_hidden);
        sizes.push(1);
        let net = MlpModel::init(&sizes, cfg.activation, 2).unwrap();
        let harmonic = spec.family != BasisFamily::TgStreamfunction;
        let tables = BasisTables {
            n_out: spec.outputs(),
            channels: if harmonic { 1 + 2 * problem.jet_dims() } else { 0 },
            data: value_table(spec, &samples.data.points).unwrap(),
            eval: value_table(spec, &samples.eval.points).unwrap(),
            colloc: if harmonic { jet_table(spec, &samples.colloc, problem.jet_dims()).unwrap() } else { vec![] },
        };
        let loss = |c: &[f64], n: &MlpModel| {
            let p = NetPart { net: n, family: spec.family };
            loss_grad(c, Some(&p), problem, &samples, &tables, cfg).unwrap()
        };
        let (_, g) = loss(&coeffs, &net);
        let h = 1e-6;
        for i in 0..coeffs.len() {
            let (mut a, mut b) = (coeffs.clone(), coeffs.clone());
            a[i] += h;
            b[i] -= h;
            let fd = (loss(&a, &net).0.total - loss(&b, &net).0.total) / (2.0 * h);
            assert!((fd - g.coeffs[i]).abs() < 1e-5 * (1.0 + fd.abs()), "coeff {i}: {fd} vs {}", g.coeffs[i]);
        }
        for i in 0..net.param_count() {
            let (mut a, mut b) = (net.clone(), net.clone());
            a.params[i] += h;
            b.params[i] -= h;
            let fd = (loss(&coeffs, &a).0.total - loss(&coeffs, &b).0.total) / (2.0 * h);
            assert!((fd - g.net[i]).abs() < 1e-5 * (1.0 + fd.abs()), "net {i}: {fd} vs {}", g.net[i]);
        }
    }

    #[test]
    fn helical_gradient_matches_finite_differences() {
        fd_check(&Problem::Helical(HelicalFieldConfig::default()), &BasisSpec::helical(7), &cfg());
    }

    #[test]
    fn taylor_green_gradient_matches_finite_differences() {
        let spec = BasisSpec::taylor_green(vec![[1, 1], [1, 2]], 0.01, 1.0);
        fd_check(&Problem::TaylorGreen(Default::default()), &spec, &cfg());
    }

    #[test]
    fn warm_start_recovers_field_in_span() {
        let problem = Problem::Helical(HelicalFieldConfig::default());
        let c = TrainConfig { warm_start: true, trefftz_hidden: vec![], max_epochs: 0, ..cfg() };
        let (model, trace) = train_trefftz(&c, &problem, &BasisSpec::helical(11)).unwrap();
        assert!(trace.initial_mse < 1e-8, "{}", trace.initial_mse);
        assert_eq!(trace.epochs(), 0);
        let samples = Samples::generate(&problem, &c).unwrap();
        assert!(expansion_eval_mse(&model, &samples.eval).unwrap() < 1e-8);
    }

    #[test]
    fn table_mse_matches_model_mse() {
        let problem = Problem::TaylorGreen(Default::default());
        let spec = BasisSpec::taylor_green(vec![[1, 1], [2, 1]], 0.01, 1.0);
        let (model, trace) = train_trefftz(&cfg(), &problem, &spec).unwrap();
        let samples = Samples::generate(&problem, &cfg()).unwrap();
        let direct = expansion_eval_mse(&model, &samples.eval).unwrap();
        assert!((direct - trace.final_mse()).abs() < 1e-14);
    }

    #[test]
    fn incompatible_family_rejected() {
        let r = train_trefftz(&cfg(), &Problem::Heat, &BasisSpec::helical(5));
        assert!(matches!(r, Err(TrainError::InvalidConfig(_))));
    }

    #[test]
    fn gauss_newton_path_is_a_scaled_least_squares_fit() {
        let fc = HelicalFieldConfig::default();
        let spec = BasisSpec::helical(11);
        let exact = fc.coefficients(&spec);
        let c = TrainConfig { trefftz_hidden: vec![], max_epochs: 7, coeff_lr: 0.1, ..cfg() };
        let (model, _) = train_trefftz(&c, &Problem::Helical(fc), &spec).unwrap();
        let s = 1.0 - 0.9f64.powi(7);
        for (got, want) in model.coeffs.iter().zip(&exact) {
            assert!((got - s * want).abs() < 1e-9, "{got} vs {}", s * want);
        }
    }

    #[test]
    fn adam_coefficients_still_train() {
        let problem = Problem::Helical(HelicalFieldConfig::default());
        let c = TrainConfig { coeff_optimizer: CoeffOptimizer::Adam, max_epochs: 20, ..cfg() };
        let (_, trace) = train_trefftz(&c, &problem, &BasisSpec::helical(9)).unwrap();
        assert!(trace.final_mse() < trace.initial_mse);
    }
}
