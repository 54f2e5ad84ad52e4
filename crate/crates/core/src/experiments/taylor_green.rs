use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{f, pinn_divergence, pinn_velocity, trefftz_velocity, ExperimentError};
use crate::autodiff::{FieldJet, HyperDual, JetOrder};
use crate::physics::{tg_exact, tg_fields, TaylorGreenConfig};
use crate::tracing::{rms_divergence, symmetry_error, trace_streamlines, Trace};
use crate::training::{matched_mse_protocol, ComparisonBundle, Problem, TrainConfig};
use crate::trefftz::{BasisFamily, BasisSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamParams {
    pub step: f64,
    pub n_steps: usize,
    /// Points per axis for the symmetry and divergence grids.
    pub grid: usize,
}

impl Default for StreamParams {
    fn default() -> Self {
        Self { step: 0.05, n_steps: 300, grid: 32 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldScores {
    pub exact: f64,
    pub pinn: f64,
    pub trefftz: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TgComparison {
    pub bundle: ComparisonBundle,
    pub symmetry: FieldScores,
    pub divergence: FieldScores,
    /// `(model, traces)` for exact, pinn and trefftz in that order.
    pub streamlines: Vec<(&'static str, Vec<Trace<2>>)>,
}

impl TgComparison {
    pub fn summary_csv(&self) -> String {
        let b = &self.bundle;
        let mut s = String::from("model,symmetry_error,rms_divergence,report_mse\n");
        s += &format!("exact,{},{},0.0\n", f(self.symmetry.exact), f(self.divergence.exact));
        s += &format!("pinn,{},{},{}\n", f(self.symmetry.pinn), f(self.divergence.pinn), f(b.pinn_report_mse));
        s += &format!("trefftz,{},{},{}\n", f(self.symmetry.trefftz), f(self.divergence.trefftz), f(b.trefftz_report_mse));
        s
    }
}

fn exact_divergence(tg: &TaylorGreenConfig, x: f64, y: f64) -> f64 {
    let jet = FieldJet::from_field(
        |q: &[HyperDual]| {
            let t = q[0] * 0.0 + tg.time;
            tg_fields(tg, &[q[0], q[1], t]).to_vec()
        },
        &[x, y],
        2,
        JetOrder::Gradient,
    );
    jet.map_or(f64::NAN, |j| j.d(0, 0) + j.d(1, 1))
}

/// `n × n` seeds at cell centres of a grid offset from the stagnation points.
pub fn default_stream_seeds(n: usize) -> Vec<[f64; 2]> {
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            v.push([TAU * (i as f64 + 0.3) / n as f64, TAU * (j as f64 + 0.6) / n as f64]);
        }
    }
    v
}

/// Matched-MSE comparison on the Taylor–Green velocity at the configured
/// time, with streamlines from shared seeds and symmetry / divergence scores
/// for the exact, PINN and Trefftz fields.
pub fn run_tg_comparison(
    cfg: &TrainConfig,
    tg: &TaylorGreenConfig,
    spec: &BasisSpec,
    seeds: &[[f64; 2]],
    stream: &StreamParams,
) -> Result<TgComparison, ExperimentError> {
    if spec.family != BasisFamily::TgStreamfunction {
        return Err(ExperimentError::InvalidConfig("taylor-green comparison needs the tg_streamfunction family".into()));
    }
    if (spec.time - tg.time).abs() > 1e-12 || (spec.viscosity - tg.viscosity).abs() > 1e-12 {
        return Err(ExperimentError::InvalidConfig(format!(
            "basis time/viscosity ({}, {}) must match the flow ({}, {})",
            spec.time, spec.viscosity, tg.time, tg.viscosity
        )));
    }
    let bundle = matched_mse_protocol(cfg, &Problem::TaylorGreen(tg.clone()), spec)?;
    let (symmetry, divergence, streamlines) = analyse(&bundle, tg, seeds, stream)?;
    Ok(TgComparison { bundle, symmetry, divergence, streamlines })
}

type Analysis = (FieldScores, FieldScores, Vec<(&'static str, Vec<Trace<2>>)>);

fn analyse(bundle: &ComparisonBundle, tg: &TaylorGreenConfig, seeds: &[[f64; 2]], stream: &StreamParams) -> Result<Analysis, ExperimentError> {
    let exact = |p: &[f64; 2]| {
        let e = tg_exact(tg, p[0], p[1]);
        [e[0], e[1]]
    };
    let pinn = pinn_velocity(&bundle.pinn);
    let tref = trefftz_velocity(&bundle.trefftz);
    let n = stream.grid;
    let symmetry = FieldScores {
        exact: symmetry_error(|x, y| exact(&[x, y]), n)?,
        pinn: symmetry_error(|x, y| pinn(&[x, y]), n)?,
        trefftz: symmetry_error(|x, y| tref(&[x, y]), n)?,
    };
    let divergence = FieldScores {
        exact: rms_divergence(|x, y| exact_divergence(tg, x, y), n)?,
        pinn: rms_divergence(|x, y| pinn_divergence(&bundle.pinn, x, y), n)?,
        trefftz: rms_divergence(|x, y| bundle.trefftz.divergence(&[x, y]).unwrap_or(f64::NAN), n)?,
    };
    let streamlines = vec![
        ("exact", trace_streamlines(exact, seeds, stream.step, stream.n_steps)?),
        ("pinn", trace_streamlines(&pinn, seeds, stream.step, stream.n_steps)?),
        ("trefftz", trace_streamlines(&tref, seeds, stream.step, stream.n_steps)?),
    ];
    Ok((symmetry, divergence, streamlines))
}
