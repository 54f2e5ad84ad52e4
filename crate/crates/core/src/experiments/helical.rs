use rayon::prelude::*;

use super::{exact_bfield_fn, f, pinn_bfield, trefftz_bfield, ExperimentError};
use crate::physics::HelicalFieldConfig;
use crate::tracing::{compare_sections, trace_field_line, trace_section, PoincareSection, StructureMetrics, Termination, Trace, TraceParams};
use crate::training::{matched_mse_protocol, ComparisonBundle, Problem, TrainConfig};
use crate::trefftz::BasisSpec;

/// Field names used in exports, in plotting order.
pub const MODELS: [&str; 3] = ["exact", "pinn", "trefftz"];

#[derive(Clone, Debug, PartialEq)]
pub struct SectionExport {
    pub model: &'static str,
    pub seed_index: usize,
    pub section: PoincareSection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceExport {
    pub model: &'static str,
    pub trace: Trace<3>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HelicalComparison {
    pub bundle: ComparisonBundle,
    pub seeds: Vec<[f64; 3]>,
    pub pinn_metrics: Vec<StructureMetrics>,
    pub trefftz_metrics: Vec<StructureMetrics>,
    pub sections: Vec<SectionExport>,
    /// Short traces from the first seed for field-line plots.
    pub traces: Vec<TraceExport>,
}

/// Mean surface distance; infinite when any seed produced no punctures.
pub fn mean_surface_distance(m: &[StructureMetrics]) -> f64 {
    m.iter().map(|s| s.surface_distance).sum::<f64>() / m.len() as f64
}

/// `n` seeds on the ray `θ = 0, z = 0` at radii evenly spaced in `(0, 0.6 R]`.
pub fn default_trace_seeds(field: &HelicalFieldConfig, n: usize) -> Vec<[f64; 3]> {
    (1..=n).map(|i| [0.6 * field.radius * i as f64 / n as f64, 0.0, 0.0]).collect()
}

impl HelicalComparison {
    pub fn metrics_csv(&self) -> String {
        let mut s = String::from(
            "model,seed_x,seed_y,seed_z,model_transits,exact_transits,annulus_width,exact_annulus_width,surface_distance,crossing_flag,degenerate\n",
        );
        for (name, ms) in [("pinn", &self.pinn_metrics), ("trefftz", &self.trefftz_metrics)] {
            for m in ms {
                s += &format!(
                    "{name},{},{},{},{},{},{},{},{},{},{}\n",
                    f(m.seed[0]),
                    f(m.seed[1]),
                    f(m.seed[2]),
                    m.model_transits,
                    m.exact_transits,
                    f(m.annulus_width),
                    f(m.exact_annulus_width),
                    f(m.surface_distance),
                    m.crossing_flag,
                    m.degenerate
                );
            }
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let b = &self.bundle;
        let mut s = String::from("model,stop_epoch,stop_mse,report_mse,mean_surface_distance,crossing_rate\n");
        let rate = |m: &[StructureMetrics]| {
            if m.is_empty() {
                f64::NAN
            } else {
                m.iter().filter(|x| x.crossing_flag).count() as f64 / m.len() as f64
            }
        };
        let msd = |m: &[StructureMetrics]| if m.is_empty() { f64::NAN } else { mean_surface_distance(m) };
        s += &format!(
            "pinn,{},{},{},{},{}\n",
            b.pinn_trace.epochs(),
            f(b.target_mse),
            f(b.pinn_report_mse),
            f(msd(&self.pinn_metrics)),
            f(rate(&self.pinn_metrics))
        );
        s += &format!(
            "trefftz,{},{},{},{},{}\n",
            b.trefftz_trace.stop_epoch.map_or("none".to_string(), |e| e.to_string()),
            f(b.trefftz_stop_mse),
            f(b.trefftz_report_mse),
            f(msd(&self.trefftz_metrics)),
            f(rate(&self.trefftz_metrics))
        );
        s
    }
}

/// Matched-MSE training on the helical potential followed by Poincaré
/// comparisons of both learned fields against the exact one from `seeds`.
/// An unmatched bundle still gets metrics; `bundle.matched` flags it.
pub fn run_helical_comparison(
    cfg: &TrainConfig,
    field: &HelicalFieldConfig,
    spec: &BasisSpec,
    seeds: &[[f64; 3]],
    params: &TraceParams,
) -> Result<HelicalComparison, ExperimentError> {
    if (params.pitch - field.pitch).abs() > 1e-12 || params.radius > field.radius {
        return Err(ExperimentError::InvalidConfig(format!(
            "trace pitch {} / radius {} must match the field (pitch {}, radius {})",
            params.pitch, params.radius, field.pitch, field.radius
        )));
    }
    let bundle = matched_mse_protocol(cfg, &Problem::Helical(field.clone()), spec)?;
    let (pinn_metrics, trefftz_metrics, sections, traces) = analyse(&bundle, field, seeds, params)?;
    Ok(HelicalComparison { bundle, seeds: seeds.to_vec(), pinn_metrics, trefftz_metrics, sections, traces })
}

type Analysis = (Vec<StructureMetrics>, Vec<StructureMetrics>, Vec<SectionExport>, Vec<TraceExport>);

fn analyse(bundle: &ComparisonBundle, field: &HelicalFieldConfig, seeds: &[[f64; 3]], params: &TraceParams) -> Result<Analysis, ExperimentError> {
    let period = field.period();
    let exact = exact_bfield_fn(field);
    let pinn = pinn_bfield(&bundle.pinn, period);
    let tref = trefftz_bfield(&bundle.trefftz, period);

    type Row = (PoincareSection, (PoincareSection, Termination), (PoincareSection, Termination));
    let rows: Vec<Row> = seeds
        .par_iter()
        .map(|&s| {
            let ex = trace_section(&exact, s, params, params.transits * params.exact_factor.max(1))?.0;
            let p = trace_section(&pinn, s, params, params.transits)?;
            let t = trace_section(&tref, s, params, params.transits)?;
            Ok((ex, p, t))
        })
        .collect::<Result<_, ExperimentError>>()?;

    let mut pinn_metrics = Vec::new();
    let mut trefftz_metrics = Vec::new();
    let mut sections = Vec::new();
    for (k, ((ex, (ps, pt), (ts, tt)), &seed)) in rows.into_iter().zip(seeds).enumerate() {
        pinn_metrics.push(compare_sections(seed, &ps, pt, &ex, params));
        trefftz_metrics.push(compare_sections(seed, &ts, tt, &ex, params));
        for (model, section) in MODELS.into_iter().zip([ex, ps, ts]) {
            sections.push(SectionExport { model, seed_index: k, section });
        }
    }

    let mut traces = Vec::new();
    if let Some(&s) = seeds.first() {
        let r = params.radius;
        let n = params.steps_for(2);
        let inside = |x: &[f64; 3]| x[0].hypot(x[1]) <= r;
        let fields: [&(dyn Fn(&[f64; 3]) -> [f64; 3] + Sync); 3] = [&exact, &pinn, &tref];
        for (model, fld) in MODELS.into_iter().zip(fields) {
            if let Ok(trace) = trace_field_line(fld, inside, s, params.step, n) {
                traces.push(TraceExport { model, trace });
            }
        }
    }
    Ok((pinn_metrics, trefftz_metrics, sections, traces))
}
