//! TOML run configuration. Every section is optional and falls back to its
//! defaults; unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::StreamParams;
use crate::mlp::Activation;
use crate::physics::{AdvDiffConfig, HelicalFieldConfig, TaylorGreenConfig};
use crate::tracing::TraceParams;
use crate::training::TrainConfig;
use crate::trefftz::BasisSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Hallucination,
    Helical,
    NbSweep,
    TaylorGreen,
    HeatDemo,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Hallucination,
        ExperimentKind::Helical,
        ExperimentKind::NbSweep,
        ExperimentKind::TaylorGreen,
        ExperimentKind::HeatDemo,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::Hallucination => "hallucination",
            ExperimentKind::Helical => "helical",
            ExperimentKind::NbSweep => "nb-sweep",
            ExperimentKind::TaylorGreen => "taylor-green",
            ExperimentKind::HeatDemo => "heat-demo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HallucinationParams {
    pub activations: Vec<Activation>,
    pub depths: Vec<usize>,
    pub widths: Vec<usize>,
    pub repeats: usize,
}

impl Default for HallucinationParams {
    fn default() -> Self {
        Self { activations: Activation::ALL.to_vec(), depths: vec![2, 3, 4], widths: vec![16, 32, 64], repeats: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    pub nb_list: Vec<usize>,
    pub repeats: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self { nb_list: vec![1, 3, 5, 7, 9, 11, 15, 19], repeats: 3 }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    /// Root of every derived seed; overrides `train.seed`. Below 2^63.
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Trace seeds for the helical comparison and sweep.
    #[serde(default = "default_trace_seeds")]
    pub trace_seeds: usize,
    /// Streamline seeds for the Taylor–Green comparison.
    #[serde(default = "default_stream_seeds")]
    pub stream_seeds: usize,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub helical: HelicalFieldConfig,
    #[serde(default)]
    pub taylor_green: TaylorGreenConfig,
    #[serde(default)]
    pub advdiff: AdvDiffConfig,
    /// Trefftz basis; when absent a default for the experiment is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisSpec>,
    #[serde(default)]
    pub trace: TraceParams,
    #[serde(default)]
    pub stream: StreamParams,
    #[serde(default)]
    pub hallucination: HallucinationParams,
    #[serde(default)]
    pub sweep: SweepParams,
}

fn default_trace_seeds() -> usize {
    3
}

fn default_stream_seeds() -> usize {
    4
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("config serialize error: {0}")]
    Serialize(String),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

/// Stream-function modes of the default Taylor–Green basis.
pub const DEFAULT_TG_MODES: [[u32; 2]; 4] = [[1, 1], [1, 2], [2, 1], [2, 2]];

impl RunConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        parse_config(&format!("experiment = \"{}\"", experiment.tag())).expect("defaults are valid")
    }

    /// Training config with the master seed applied.
    pub fn train_config(&self) -> TrainConfig {
        let mut t = self.train.clone();
        t.seed = self.master_seed;
        if self.experiment == ExperimentKind::Hallucination {
            t.lambda_pde = 0.0;
            t.n_collocation = 0;
        }
        t
    }

    /// The configured basis, or the experiment's default.
    pub fn basis_spec(&self) -> BasisSpec {
        if let Some(b) = &self.basis {
            return b.clone();
        }
        match self.experiment {
            ExperimentKind::TaylorGreen => {
                BasisSpec::taylor_green(DEFAULT_TG_MODES.to_vec(), self.taylor_green.viscosity, self.taylor_green.time)
            }
            _ => BasisSpec { pitch: self.helical.pitch, radius: self.helical.radius, ..BasisSpec::helical(11) },
        }
    }

    /// Trace parameters with the field geometry applied.
    pub fn trace_params(&self) -> TraceParams {
        TraceParams { pitch: self.helical.pitch, radius: self.helical.radius, ..self.trace.clone() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.master_seed > i64::MAX as u64 {
            return Err(invalid("master_seed", "must be < 2^63 (TOML integers are signed 64-bit)"));
        }
        let mut train = self.train_config();
        train.mse_target = None;
        train.validate().map_err(|e| invalid("train", e.to_string()))?;
        self.helical.validate().map_err(|e| invalid("helical", e.to_string()))?;
        self.taylor_green.validate().map_err(|e| invalid("taylor_green", e.to_string()))?;
        self.advdiff.validate().map_err(|e| invalid("advdiff", e.to_string()))?;
        if let Some(b) = &self.basis {
            if b.count < 1 {
                return Err(invalid("basis.count", format!("must be >= 1, got {}", b.count)));
            }
        }
        let spec = self.basis_spec();
        spec.validate().map_err(|e| invalid("basis", e.to_string()))?;
        let t = &self.trace;
        if !(t.step > 0.0 && t.step.is_finite()) {
            return Err(invalid("trace.step", "must be > 0"));
        }
        if t.transits < 2 {
            return Err(invalid("trace.transits", "must be >= 2"));
        }
        if t.exact_factor < 1 {
            return Err(invalid("trace.exact_factor", "must be >= 1"));
        }
        if !(self.stream.step > 0.0) {
            return Err(invalid("stream.step", "must be > 0"));
        }
        if self.stream.grid < 2 {
            return Err(invalid("stream.grid", "must be >= 2"));
        }
        let h = &self.hallucination;
        for (key, empty) in [
            ("hallucination.activations", h.activations.is_empty()),
            ("hallucination.depths", h.depths.is_empty()),
            ("hallucination.widths", h.widths.is_empty()),
        ] {
            if empty {
                return Err(invalid(key, "must not be empty"));
            }
        }
        if h.depths.contains(&0) {
            return Err(invalid("hallucination.depths", "entries must be >= 1"));
        }
        if h.widths.contains(&0) {
            return Err(invalid("hallucination.widths", "entries must be >= 1"));
        }
        if h.repeats < 1 {
            return Err(invalid("hallucination.repeats", "must be >= 1"));
        }
        let s = &self.sweep;
        if s.nb_list.len() < 4 {
            return Err(invalid("sweep.nb_list", "needs at least 4 entries"));
        }
        if s.nb_list[0] < 1 {
            return Err(invalid("sweep.nb_list", "entries must be >= 1"));
        }
        if s.nb_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("sweep.nb_list", "must be strictly increasing"));
        }
        if s.repeats < 1 {
            return Err(invalid("sweep.repeats", "must be >= 1"));
        }
        if self.experiment == ExperimentKind::NbSweep {
            let last = *s.nb_list.last().unwrap();
            BasisSpec { count: last, ..spec }.validate().map_err(|e| invalid("sweep.nb_list", e.to_string()))?;
        }
        Ok(())
    }
}

/// Parse and validate a TOML config.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn serialize_config(cfg: &RunConfig) -> Result<String, ConfigError> {
    toml::to_string(cfg).map_err(|e| ConfigError::Serialize(e.to_string()))
}
