//! Configuration, seeding, output management and plotting.

mod config;
mod plot;
mod run;
mod seed;

pub use config::{
    parse_config, serialize_config, ConfigError, ExperimentKind, HallucinationParams, RunConfig, SweepParams,
    DEFAULT_TG_MODES,
};
pub use plot::{emit_plot, render_svg, PlotData, PlotError, PlotKind, Series};
pub use run::{run, run_with_threads, sha256_hex, FileEntry, RunError, RunManifest, MANIFEST_FILE};
pub use seed::{derive_seed, rng_for};
