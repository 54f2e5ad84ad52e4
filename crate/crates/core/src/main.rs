use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trefftz_lab::harness::{parse_config, run, run_with_threads, ExperimentKind, RunConfig, RunError};

#[derive(Parser)]
#[command(name = "trefftz-lab", version, about = "Standard and Trefftz-constrained PINN experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Value-only fits of the advection-diffusion plume across activations and sizes.
    Hallucination(RunArgs),
    /// Matched-MSE helical comparison with Poincaré diagnostics.
    Helical(RunArgs),
    /// Trefftz basis-count sweep.
    NbSweep(RunArgs),
    /// Matched-MSE Taylor-Green comparison with streamlines.
    TaylorGreen(RunArgs),
    /// Exact, data-driven and PINN heat fields.
    HeatDemo(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Validate the config and exit.
    #[arg(long)]
    dry_run: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "status": "error", "kind": kind, "message": message }).to_string()
}

fn load(kind: ExperimentKind, args: &RunArgs) -> Result<RunConfig, (String, String)> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ("io".into(), format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| ("config".into(), e.to_string()))?
        }
        None => RunConfig::new(kind),
    };
    if cfg.experiment != kind {
        return Err((
            "config".into(),
            format!("experiment: config says {} but the subcommand is {}", cfg.experiment.tag(), kind.tag()),
        ));
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate().map_err(|e| ("config".into(), e.to_string()))?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Hallucination(a) => (ExperimentKind::Hallucination, a),
        Command::Helical(a) => (ExperimentKind::Helical, a),
        Command::NbSweep(a) => (ExperimentKind::NbSweep, a),
        Command::TaylorGreen(a) => (ExperimentKind::TaylorGreen, a),
        Command::HeatDemo(a) => (ExperimentKind::HeatDemo, a),
    };
    let cfg = match load(kind, args) {
        Ok(c) => c,
        Err((k, m)) => {
            eprintln!("{}", error_line(&k, &m));
            return ExitCode::from(2);
        }
    };
    if args.dry_run {
        println!("{}", serde_json::json!({ "status": "ok", "experiment": kind.tag(), "dry_run": true }));
        return ExitCode::SUCCESS;
    }
    let result = match args.threads {
        Some(n) => run_with_threads(&cfg, n),
        None => run(&cfg),
    };
    match result {
        Ok(m) => {
            let out = serde_json::json!({
                "status": "ok",
                "experiment": kind.tag(),
                "output_dir": cfg.output_dir,
                "files": m.files.len(),
                "config_hash": m.config_hash,
            });
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            ExitCode::from(match e {
                RunError::Config(_) => 2,
                _ => 1,
            })
        }
    }
}
