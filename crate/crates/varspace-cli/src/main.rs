//! Reproducible experiment runner: each theorem-backed experiment is a
//! subcommand taking a TOML config, an output directory, and an optional
//! seed override. Runs write their CSV/JSON artifacts plus a manifest;
//! identical configs and seeds reproduce the CSVs byte for byte.

mod config;
mod experiments;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use config::Config;

#[derive(Parser)]
#[command(name = "varspace", version, about = "Variation-space experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML; unknown keys are errors).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON artifacts and the run manifest.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the variation norm of a target with upper and dual lower
    /// bounds.
    EstimateNorm(RunArgs),
    /// Measure the random-sampling error decay against the n^{-1/2} bound.
    MaureyRate(RunArgs),
    /// Compare the 1D BV characterization with the estimated gauge.
    OnedimEquiv(RunArgs),
    /// Compare the spectral integral with the Fourier-dictionary gauge.
    SpectralEquiv(RunArgs),
    /// Build Gaussian-plus-correction cutoffs and tabulate their masses.
    Cutoff(RunArgs),
    /// Decompose random normalized ReLU units into short ridge
    /// combinations.
    BarronDecomp(RunArgs),
}

/// Exit taxonomy: 0 success, 1 solver/assertion failure, 2 configuration
/// error.
#[derive(Debug)]
pub struct RunError {
    pub kind: RunErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunErrorKind {
    Config,
    Run,
}

impl RunError {
    pub fn config(message: String) -> Self {
        Self {
            kind: RunErrorKind::Config,
            message,
        }
    }

    pub fn run(message: String) -> Self {
        Self {
            kind: RunErrorKind::Run,
            message,
        }
    }
}

impl From<varspace::Error> for RunError {
    fn from(e: varspace::Error) -> Self {
        RunError::run(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::run(format!("io: {e}"))
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config_hash: &'a str,
    version: &'a str,
    experiment: &'a str,
    started_utc: String,
    finished_utc: String,
    status: &'a str,
    error: Option<&'a str>,
    outputs: &'a [String],
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::EstimateNorm(a) => ("estimate-norm", a),
        Command::MaureyRate(a) => ("maurey-rate", a),
        Command::OnedimEquiv(a) => ("onedim-equiv", a),
        Command::SpectralEquiv(a) => ("spectral-equiv", a),
        Command::Cutoff(a) => ("cutoff", a),
        Command::BarronDecomp(a) => ("barron-decomp", a),
    };
    match run(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({
                "error": {
                    "kind": match e.kind { RunErrorKind::Config => "config", RunErrorKind::Run => "run" },
                    "message": e.message,
                }
            });
            eprintln!("{payload}");
            let _ = fs::create_dir_all(&args.out);
            let _ = fs::write(
                args.out.join("error.json"),
                serde_json::to_string_pretty(&payload).unwrap_or_default(),
            );
            match e.kind {
                RunErrorKind::Config => ExitCode::from(2),
                RunErrorKind::Run => ExitCode::from(1),
            }
        }
    }
}

fn run(name: &str, args: &RunArgs) -> Result<(), RunError> {
    let raw = fs::read(&args.config)
        .map_err(|e| RunError::config(format!("cannot read {}: {e}", args.config.display())))?;
    let digest = Sha256::digest(&raw);
    let hash = format!(
        "sha256:{}",
        digest.iter().map(|b| format!("{b:02x}")).collect::<String>()
    );
    let text = String::from_utf8(raw)
        .map_err(|_| RunError::config("configuration is not UTF-8".into()))?;
    let mut cfg = Config::parse(&text, name)?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    fs::create_dir_all(&args.out)?;
    let _ = fs::remove_file(args.out.join("error.json"));

    let started = chrono::Utc::now().to_rfc3339();
    let outcome = experiments::dispatch(name, &cfg, &args.out, args.quiet);
    let finished = chrono::Utc::now().to_rfc3339();

    let (status, outputs, error_text) = match &outcome {
        Ok(outputs) => ("success", outputs.clone(), None),
        Err(e) => ("failed", Vec::new(), Some(e.message.clone())),
    };
    let manifest = RunManifest {
        config_hash: &hash,
        version: env!("CARGO_PKG_VERSION"),
        experiment: name,
        started_utc: started,
        finished_utc: finished,
        status,
        error: error_text.as_deref(),
        outputs: &outputs,
    };
    // The manifest is written last; partial failures leave one with failed
    // status rather than no manifest.
    fs::write(
        args.out.join("run_manifest.json"),
        serde_json::to_string_pretty(&manifest)
            .map_err(|e| RunError::run(format!("manifest: {e}")))?,
    )?;
    if !args.quiet {
        match &outcome {
            Ok(outputs) => eprintln!("[{name}] wrote {} file(s) to {}", outputs.len(), args.out.display()),
            Err(e) => eprintln!("[{name}] failed: {}", e.message),
        }
    }
    outcome.map(|_| ())
}

pub(crate) fn write_artifact(
    out_dir: &Path,
    name: &str,
    contents: &str,
    outputs: &mut Vec<String>,
) -> Result<(), RunError> {
    fs::write(out_dir.join(name), contents)?;
    outputs.push(name.to_string());
    Ok(())
}

/// 17 significant digits, enough to round-trip f64 in CSV cells.
pub(crate) fn f17(x: f64) -> String {
    format!("{x:.16e}")
}
