//! Experiment dispatch, artifact writing and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::config::{serialize_config, ConfigError, ExperimentKind, RunConfig};
use super::plot::{render_svg, PlotData, PlotError, PlotKind, Series};
use crate::experiments::{
    default_stream_seeds, default_trace_seeds, run_hallucination, run_heat_demo, run_helical_comparison, run_nb_sweep,
    run_tg_comparison, ExperimentError,
};
use crate::tracing::{PoincareSection, Trace};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: ExperimentKind,
    pub master_seed: u64,
    /// SHA-256 of the serialized config.
    pub config_hash: String,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// Sorted by path.
    pub files: Vec<FileEntry>,
    pub failure: Option<String>,
}

impl RunManifest {
    pub fn hashes(&self) -> Vec<(&str, &str)> {
        self.files.iter().map(|f| (f.path.as_str(), f.sha256.as_str())).collect()
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io error at {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Io { .. } => "io",
            RunError::Experiment(_) => "experiment",
            RunError::Plot(_) => "plot",
            RunError::Pool(_) => "thread-pool",
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(64);
    for b in Sha256::digest(bytes) {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn io_err(path: &Path, e: std::io::Error) -> RunError {
    RunError::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Writes artifacts under the output directory, one call per file, and
/// records their hashes.
struct Sink {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl Sink {
    fn put(&mut self, rel: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.files.retain(|f| f.path != rel);
        self.files.push(FileEntry { path: rel.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    fn csv(&mut self, rel: &str, text: &str) -> Result<(), RunError> {
        self.put(rel, text.as_bytes())
    }

    fn plot(&mut self, rel: &str, kind: PlotKind, data: &PlotData) -> Result<(), RunError> {
        let svg = render_svg(kind, data)?;
        self.put(rel, svg.as_bytes())
    }
}

/// Run the configured experiment on the global thread pool.
pub fn run(cfg: &RunConfig) -> Result<RunManifest, RunError> {
    cfg.validate()?;
    // the output location is not part of the experiment's identity
    let config_text = serialize_config(&RunConfig { output_dir: PathBuf::from("."), ..cfg.clone() })?;
    let started = now();
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| io_err(&cfg.output_dir, e))?;
    let mut sink = Sink { root: cfg.output_dir.clone(), files: Vec::new() };
    let outcome = sink.csv("config.toml", &config_text).and_then(|_| produce(cfg, &mut sink));
    let mut files = sink.files;
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = RunManifest {
        experiment: cfg.experiment,
        master_seed: cfg.master_seed,
        config_hash: sha256_hex(config_text.as_bytes()),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: started,
        finished_unix: now(),
        files,
        failure: outcome.as_ref().err().map(|e| e.to_string()),
    };
    let path = cfg.output_dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json).map_err(|e| io_err(&path, e))?;
    outcome.map(|_| manifest)
}

/// Run on a dedicated pool of `threads` workers.
pub fn run_with_threads(cfg: &RunConfig, threads: usize) -> Result<RunManifest, RunError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| RunError::Pool(e.to_string()))?;
    pool.install(|| run(cfg))
}

fn section_points(s: &PoincareSection) -> Vec<[f64; 2]> {
    s.punctures.iter().map(|p| p.xy()).collect()
}

fn trace_xy<const N: usize>(t: &Trace<N>) -> Vec<[f64; 2]> {
    t.points.iter().map(|p| [p[0], p[1]]).collect()
}

fn produce(cfg: &RunConfig, out: &mut Sink) -> Result<(), RunError> {
    let train = cfg.train_config();
    match cfg.experiment {
        ExperimentKind::Hallucination => {
            let h = &cfg.hallucination;
            let study = run_hallucination(&h.activations, &h.depths, &h.widths, h.repeats, &train, &cfg.advdiff)?;
            out.csv("hallucination.csv", &study.to_csv())?;
            let s = &study.summary;
            out.csv(
                "hallucination_summary.csv",
                &format!(
                    "used,excluded,value_cov,laplacian_cov,value_decades,laplacian_decades\n{},{},{:?},{:?},{:?},{:?}\n",
                    s.used, s.excluded, s.value_cov, s.laplacian_cov, s.value_decades, s.laplacian_decades
                ),
            )?;
            let ok = study.records.iter().enumerate().filter(|(_, r)| !r.diverged);
            let (mut v, mut l) = (Vec::new(), Vec::new());
            for (k, r) in ok {
                v.push([k as f64, r.value_mse]);
                l.push([k as f64, r.laplacian_mse]);
            }
            let data = PlotData {
                title: "Normalized errors per configuration".into(),
                x_label: "configuration index".into(),
                y_label: "normalized MSE".into(),
                series: vec![Series { label: "value".into(), points: v }, Series { label: "laplacian".into(), points: l }],
                log_y: true,
                group_by_label: false,
            };
            out.plot("hallucination.svg", PlotKind::Scatter, &data)?;
        }
        ExperimentKind::Helical => {
            let seeds = default_trace_seeds(&cfg.helical, cfg.trace_seeds);
            let cmp = run_helical_comparison(&train, &cfg.helical, &cfg.basis_spec(), &seeds, &cfg.trace_params())?;
            out.csv("helical_summary.csv", &cmp.summary_csv())?;
            out.csv("helical_metrics.csv", &cmp.metrics_csv())?;
            out.csv("pinn_trace.csv", &cmp.bundle.pinn_trace.to_csv())?;
            out.csv("trefftz_trace.csv", &cmp.bundle.trefftz_trace.to_csv())?;
            for s in &cmp.sections {
                out.csv(&format!("sections/{}_seed{}.csv", s.model, s.seed_index), &s.section.to_csv())?;
            }
            for t in &cmp.traces {
                out.csv(&format!("traces/{}.csv", t.model), &t.trace.to_csv())?;
            }
            if !cmp.sections.is_empty() {
                let series = cmp
                    .sections
                    .iter()
                    .map(|s| Series { label: s.model.to_string(), points: section_points(&s.section) })
                    .collect();
                let data = PlotData {
                    title: "Poincaré sections".into(),
                    x_label: "x".into(),
                    y_label: "y".into(),
                    series,
                    log_y: false,
                    group_by_label: true,
                };
                out.plot("poincare.svg", PlotKind::Scatter, &data)?;
                let series =
                    cmp.traces.iter().map(|t| Series { label: t.model.to_string(), points: trace_xy(&t.trace) }).collect();
                let data = PlotData {
                    title: "Field lines".into(),
                    x_label: "x".into(),
                    y_label: "y".into(),
                    series,
                    log_y: false,
                    group_by_label: false,
                };
                out.plot("field_lines.svg", PlotKind::FieldLines, &data)?;
            }
        }
        ExperimentKind::NbSweep => {
            let seeds = default_trace_seeds(&cfg.helical, cfg.trace_seeds);
            let s = &cfg.sweep;
            let study = run_nb_sweep(&train, &cfg.helical, &s.nb_list, s.repeats, &seeds, &cfg.trace_params())?;
            out.csv("sweep.csv", &study.to_csv())?;
            out.csv("sweep_mean.csv", &study.mean_csv())?;
            let points = study.mean_mse.iter().map(|(n, m)| [*n as f64, *m]).collect();
            let data = PlotData {
                title: "Eval MSE against basis count".into(),
                x_label: "N_b".into(),
                y_label: "mean eval MSE".into(),
                series: vec![Series { label: "seed mean".into(), points }],
                log_y: true,
                group_by_label: false,
            };
            out.plot("sweep.svg", PlotKind::Line, &data)?;
        }
        ExperimentKind::TaylorGreen => {
            let seeds = default_stream_seeds(cfg.stream_seeds);
            let cmp = run_tg_comparison(&train, &cfg.taylor_green, &cfg.basis_spec(), &seeds, &cfg.stream)?;
            out.csv("tg_summary.csv", &cmp.summary_csv())?;
            out.csv("pinn_trace.csv", &cmp.bundle.pinn_trace.to_csv())?;
            out.csv("trefftz_trace.csv", &cmp.bundle.trefftz_trace.to_csv())?;
            for (model, traces) in &cmp.streamlines {
                for (k, t) in traces.iter().enumerate() {
                    out.csv(&format!("streamlines/{model}_{k}.csv"), &t.to_csv())?;
                }
                let series =
                    traces.iter().enumerate().map(|(k, t)| Series { label: format!("seed {k}"), points: trace_xy(t) }).collect();
                let data = PlotData {
                    title: format!("Streamlines ({model})"),
                    x_label: "x".into(),
                    y_label: "y".into(),
                    series,
                    log_y: false,
                    group_by_label: false,
                };
                out.plot(&format!("streamlines_{model}.svg"), PlotKind::Streamlines, &data)?;
            }
        }
        ExperimentKind::HeatDemo => {
            let demo = run_heat_demo(&train)?;
            out.csv("heat_fields.csv", &demo.fields_csv())?;
            out.csv("heat_summary.csv", &demo.summary_csv())?;
            let pairs = |v: &[f64]| demo.exact.iter().zip(v).map(|(e, p)| [*e, *p]).collect::<Vec<_>>();
            let data = PlotData {
                title: "Predicted against exact temperature".into(),
                x_label: "exact".into(),
                y_label: "predicted".into(),
                series: vec![
                    Series { label: "exact".into(), points: pairs(&demo.exact) },
                    Series { label: "data-driven".into(), points: pairs(&demo.data_driven) },
                    Series { label: "pinn".into(), points: pairs(&demo.pinn) },
                ],
                log_y: false,
                group_by_label: false,
            };
            out.plot("heat.svg", PlotKind::Scatter, &data)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(kind: ExperimentKind, dir: &Path) -> RunConfig {
        let mut c = RunConfig::new(kind);
        c.output_dir = dir.to_path_buf();
        c.train.max_epochs = 3;
        c.train.n_data = 20;
        c.train.n_collocation = 10;
        c.train.hidden = vec![4];
        c.train.eval_grid = 4;
        c.train.report_grid = 5;
        c
    }

    #[test]
    fn heat_demo_writes_triptych() {
        let dir = tempfile::tempdir().unwrap();
        let m = run(&tiny(ExperimentKind::HeatDemo, &dir.path().join("nested/out"))).unwrap();
        let paths: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, ["config.toml", "heat.svg", "heat_fields.csv", "heat_summary.csv"]);
        let fields = std::fs::read_to_string(dir.path().join("nested/out/heat_fields.csv")).unwrap();
        assert!(fields.starts_with("x,y,exact,data_driven,pinn\n"));
        assert!(dir.path().join("nested/out/manifest.json").exists());
    }

    #[test]
    fn same_config_same_hashes() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ma = run(&tiny(ExperimentKind::HeatDemo, a.path())).unwrap();
        let mut cb = tiny(ExperimentKind::HeatDemo, b.path());
        cb.output_dir = a.path().to_path_buf();
        let mb = run_with_threads(&cb, 2).unwrap();
        assert_eq!(ma.hashes(), mb.hashes());
        assert_eq!(ma.config_hash, mb.config_hash);
    }

    #[test]
    fn unwritable_output_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        std::fs::write(&file, "x").unwrap();
        let r = run(&tiny(ExperimentKind::HeatDemo, &file.join("sub")));
        assert!(matches!(r, Err(RunError::Io { .. })));
    }

    #[test]
    fn failure_is_recorded_in_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = tiny(ExperimentKind::TaylorGreen, dir.path());
        c.basis = Some(crate::trefftz::BasisSpec::helical(3));
        assert!(run(&c).is_err());
        let m: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
        assert!(m.failure.unwrap().contains("tg_streamfunction"));
        assert_eq!(m.files.len(), 1);
    }
}
