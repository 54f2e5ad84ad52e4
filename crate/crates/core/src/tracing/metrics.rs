use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{poincare, trace_field_line, PoincareSection, Termination, TracingError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceParams {
    pub step: f64,
    /// Section crossings collected from the model field.
    pub transits: usize,
    /// The exact reference is traced this many times longer.
    pub exact_factor: usize,
    /// Flag when the model annulus exceeds this multiple of the exact one.
    pub threshold_factor: f64,
    /// Lower bound on the exact annulus used for the threshold, absorbing
    /// integration noise of nearly perfect surfaces.
    pub width_floor: f64,
    pub pitch: f64,
    pub radius: f64,
    pub u0: f64,
}

impl Default for TraceParams {
    fn default() -> Self {
        Self {
            step: 0.02,
            transits: 20,
            exact_factor: 4,
            threshold_factor: 5.0,
            width_floor: 1e-6,
            pitch: 1.0,
            radius: 1.0,
            u0: 0.0,
        }
    }
}

impl TraceParams {
    pub fn steps_for(&self, transits: usize) -> usize {
        (transits as f64 * 1.25 * TAU / self.pitch / self.step).ceil() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureMetrics {
    pub seed: [f64; 3],
    pub model_transits: usize,
    pub exact_transits: usize,
    pub annulus_width: f64,
    pub exact_annulus_width: f64,
    /// Mean distance from model punctures to the closed polygon through the
    /// exact punctures ordered by angle.
    pub surface_distance: f64,
    pub crossing_flag: bool,
    /// The model trace left the domain, stalled, or gave < 2 punctures.
    pub degenerate: bool,
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

fn polyline_distance(p: [f64; 2], line: &[[f64; 2]]) -> f64 {
    match line {
        [] => f64::INFINITY,
        [a] => (p[0] - a[0]).hypot(p[1] - a[1]),
        _ => line.windows(2).map(|w| segment_distance(p, w[0], w[1])).fold(f64::INFINITY, f64::min),
    }
}

/// Trace from `seed` inside the cylinder `r ≤ params.radius` long enough for
/// `transits` crossings and return the first `transits` punctures.
pub fn trace_section<F>(field: F, seed: [f64; 3], params: &TraceParams, transits: usize) -> Result<(PoincareSection, Termination), TracingError>
where
    F: FnMut(&[f64; 3]) -> [f64; 3],
{
    let r = params.radius;
    let t = match trace_field_line(field, |x| x[0].hypot(x[1]) <= r, seed, params.step, params.steps_for(transits)) {
        Err(TracingError::ZeroFieldStart { .. }) => return Ok((PoincareSection::default(), Termination::Stalled)),
        r => r?,
    };
    let mut s = poincare(&t, params.pitch, params.u0);
    s.punctures.truncate(transits);
    Ok((s, t.termination))
}

/// Compare a model section against the exact one from the same seed.
pub fn compare_sections(seed: [f64; 3], model: &PoincareSection, termination: Termination, exact: &PoincareSection, params: &TraceParams) -> StructureMetrics {
    let degenerate = model.transits() < 2 || termination != Termination::StepsExhausted;
    let mut sorted = exact.punctures.clone();
    sorted.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let mut line: Vec<[f64; 2]> = sorted.iter().map(|p| p.xy()).collect();
    if line.len() > 2 {
        line.push(line[0]);
    }
    let surface_distance = if model.punctures.is_empty() {
        f64::INFINITY
    } else {
        model.punctures.iter().map(|p| polyline_distance(p.xy(), &line)).sum::<f64>() / model.transits() as f64
    };
    let exact_annulus_width = exact.annulus_width();
    let annulus_width = model.annulus_width();
    let threshold = params.threshold_factor * exact_annulus_width.max(params.width_floor);
    StructureMetrics {
        seed,
        model_transits: model.transits(),
        exact_transits: exact.transits(),
        annulus_width,
        exact_annulus_width,
        surface_distance,
        crossing_flag: degenerate || annulus_width > threshold,
        degenerate,
    }
}

/// Poincaré-section comparison of a model field against the exact one for
/// every seed.
pub fn structure_metrics<M, E>(model: M, exact: E, seeds: &[[f64; 3]], params: &TraceParams) -> Result<Vec<StructureMetrics>, TracingError>
where
    M: Fn(&[f64; 3]) -> [f64; 3],
    E: Fn(&[f64; 3]) -> [f64; 3],
{
    if !(params.step > 0.0 && params.step.is_finite()) {
        return Err(TracingError::BadStep(params.step));
    }
    seeds
        .iter()
        .map(|&seed| {
            let (ex, _) = trace_section(&exact, seed, params, params.transits * params.exact_factor.max(1))?;
            let (ms, term) = trace_section(&model, seed, params, params.transits)?;
            Ok(compare_sections(seed, &ms, term, &ex, params))
        })
        .collect()
}
