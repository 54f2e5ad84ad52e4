//! The studies as deterministic pipelines: hallucination grid, helical
//! matched-MSE comparison, basis-count sweep, Taylor–Green streamlines and
//! the heat demo. Each is a pure function of its configs and seed.

mod fields;
mod hallucination;
mod heat;
mod helical;
mod sweep;
mod taylor_green;

pub use fields::{exact_bfield_fn, pinn_bfield, pinn_divergence, pinn_velocity, trefftz_bfield, trefftz_velocity};
pub use hallucination::{run_hallucination, summarize_hallucination, HallucinationRecord, HallucinationStudy, HallucinationSummary};
pub use heat::{run_heat_demo, HeatDemo};
pub use helical::{default_trace_seeds, mean_surface_distance, run_helical_comparison, HelicalComparison, SectionExport, TraceExport};
pub use sweep::{interior_minimum, run_nb_sweep, SweepRecord, SweepStudy};
pub use taylor_green::{default_stream_seeds, run_tg_comparison, FieldScores, StreamParams, TgComparison};

use thiserror::Error;

use crate::tracing::TracingError;
use crate::training::TrainError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Tracing(#[from] TracingError),
}

/// Shortest round-trip text for a float.
pub(crate) fn f(v: f64) -> String {
    format!("{v:?}")
}
