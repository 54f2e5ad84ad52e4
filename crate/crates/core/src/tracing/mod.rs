//! Field-line and streamline integration, Poincaré sections and the
//! structure-preservation metrics built on them.

mod integrate;
mod metrics;
mod poincare;
mod symmetry;

pub use integrate::{trace_field_line, trace_streamlines, Termination, Trace, STALL_EPS};
pub use metrics::{compare_sections, structure_metrics, trace_section, StructureMetrics, TraceParams};
pub use poincare::{poincare, PoincareSection, Puncture};
pub use symmetry::{rms_divergence, symmetry_error};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TracingError {
    #[error("field magnitude {magnitude:e} at the seed point {seed:?} is below the stall threshold")]
    ZeroFieldStart { seed: Vec<f64>, magnitude: f64 },
    #[error("step must be finite and > 0, got {0}")]
    BadStep(f64),
    #[error("grid needs at least 2 points per axis, got {0}")]
    BadGrid(usize),
}
