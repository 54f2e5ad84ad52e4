use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{f, ExperimentError};
use crate::autodiff::JetOrder;
use crate::harness::derive_seed;
use crate::mlp::{Activation, MlpModel};
use crate::physics::{advdiff_exact, AdvDiffConfig};
use crate::training::{train_pinn_on, Dataset, Problem, Samples, TrainConfig, TrainError};

/// One supervised fit of the advection–diffusion plume. Both errors are
/// normalized by the mean square of the exact quantity on the report grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HallucinationRecord {
    pub activation: Activation,
    pub depth: usize,
    pub width: usize,
    pub seed: u64,
    pub value_mse: f64,
    pub laplacian_mse: f64,
    pub diverged: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HallucinationSummary {
    pub used: usize,
    pub excluded: usize,
    /// Coefficient of variation (population std / mean).
    pub value_cov: f64,
    pub laplacian_cov: f64,
    /// `log10(max / min)` across configs.
    pub value_decades: f64,
    pub laplacian_decades: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HallucinationStudy {
    pub records: Vec<HallucinationRecord>,
    pub summary: HallucinationSummary,
}

impl HallucinationStudy {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("activation,depth,width,seed,value_mse,laplacian_mse,diverged\n");
        for r in &self.records {
            s += &format!(
                "{},{},{},{},{},{},{}\n",
                r.activation.tag(),
                r.depth,
                r.width,
                r.seed,
                f(r.value_mse),
                f(r.laplacian_mse),
                r.diverged
            );
        }
        s
    }
}

fn cov(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

fn decades(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    (hi / lo).log10()
}

/// Spread statistics over the non-diverged records.
pub fn summarize_hallucination(records: &[HallucinationRecord]) -> HallucinationSummary {
    let ok: Vec<&HallucinationRecord> = records.iter().filter(|r| !r.diverged).collect();
    let excluded = records.len() - ok.len();
    if ok.is_empty() {
        return HallucinationSummary { excluded, ..Default::default() };
    }
    let v: Vec<f64> = ok.iter().map(|r| r.value_mse).collect();
    let l: Vec<f64> = ok.iter().map(|r| r.laplacian_mse).collect();
    HallucinationSummary {
        used: ok.len(),
        excluded,
        value_cov: cov(&v),
        laplacian_cov: cov(&l),
        value_decades: decades(&v),
        laplacian_decades: decades(&l),
    }
}

/// Normalized value and spatial-Laplacian errors of `scale · net` on the grid.
fn normalized_errors(net: &MlpModel, scale: f64, cfg: &AdvDiffConfig, grid: &[Vec<f64>]) -> (f64, f64) {
    let mut cache = net.new_jet_cache(3, JetOrder::Laplacian);
    let (mut ev, mut nv, mut el, mut nl) = (0.0, 0.0, 0.0, 0.0);
    for p in grid {
        let jet = net.jet_forward(p, &mut cache);
        let lap = scale * (jet.dd(0, 0) + jet.dd(0, 1) + jet.dd(0, 2));
        let ex = advdiff_exact(cfg, &[p[0], p[1], p[2]], p[3]);
        ev += (scale * jet.value[0] - ex.c).powi(2);
        nv += ex.c * ex.c;
        el += (lap - ex.laplacian).powi(2);
        nl += ex.laplacian * ex.laplacian;
    }
    (ev / nv, el / nl)
}

/// Root mean square of the training targets, or 1 when they vanish.
fn target_scale(data: &Dataset) -> f64 {
    let n = data.values.len().max(1) as f64;
    let rms = (data.values.iter().flatten().map(|v| v * v).sum::<f64>() / n).sqrt();
    if rms > 0.0 && rms.is_finite() {
        rms
    } else {
        1.0
    }
}

/// Fit the plume with every (activation, depth, width, repeat) cell using
/// value data rescaled to unit RMS, then score values and Laplacians on the
/// report grid.
pub fn run_hallucination(
    activations: &[Activation],
    depths: &[usize],
    widths: &[usize],
    repeats: usize,
    cfg: &TrainConfig,
    advdiff: &AdvDiffConfig,
) -> Result<HallucinationStudy, ExperimentError> {
    if activations.is_empty() || depths.is_empty() || widths.is_empty() || repeats == 0 {
        return Err(ExperimentError::InvalidConfig("hallucination grid needs at least one activation, depth, width and repeat".into()));
    }
    if cfg.lambda_pde != 0.0 {
        return Err(ExperimentError::InvalidConfig("hallucination study trains on values only: lambda_pde must be 0".into()));
    }
    if depths.contains(&0) || widths.contains(&0) {
        return Err(ExperimentError::InvalidConfig("depths and widths must be >= 1".into()));
    }
    let problem = Problem::AdvDiff(advdiff.clone());
    problem.validate().map_err(TrainError::from)?;
    let grid = problem.eval_grid(cfg.report_grid);
    let mut cells = Vec::new();
    for &a in activations {
        for &d in depths {
            for &w in widths {
                for r in 0..repeats {
                    cells.push((a, d, w, derive_seed(cfg.seed, "repeat", r as u64)));
                }
            }
        }
    }
    let records = cells
        .into_par_iter()
        .map(|(activation, depth, width, seed)| {
            let run = TrainConfig { activation, hidden: vec![width; depth], seed, n_collocation: 0, ..cfg.clone() };
            let rec = |value_mse, laplacian_mse, diverged| HallucinationRecord {
                activation,
                depth,
                width,
                seed,
                value_mse,
                laplacian_mse,
                diverged,
            };
            let mut samples = Samples::generate(&problem, &run)?;
            let scale = target_scale(&samples.data);
            for v in samples.data.values.iter_mut().chain(samples.eval.values.iter_mut()).flatten() {
                *v /= scale;
            }
            match train_pinn_on(&run, &problem, &samples) {
                Ok((net, _)) => {
                    let (v, l) = normalized_errors(&net, scale, advdiff, &grid);
                    let bad = !(v.is_finite() && l.is_finite());
                    Ok(rec(v, l, bad))
                }
                Err(TrainError::Diverged { .. }) => Ok(rec(f64::NAN, f64::NAN, true)),
                Err(e) => Err(ExperimentError::from(e)),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize_hallucination(&records);
    Ok(HallucinationStudy { records, summary })
}
