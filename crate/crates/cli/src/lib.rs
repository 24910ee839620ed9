//! Experiment orchestration: configuration ingestion, deterministic batch
//! execution, report emission.

pub mod config;
pub mod run;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use qpv_core::estimate::EstimateError;
use qpv_core::protocol::ProtocolError;
use qpv_core::verdict::VerdictError;

pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("round budget not reached: inconclusive transcript")]
    Inconclusive,
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Verdict(#[from] VerdictError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

/// Exit codes: 0 ok, 2 config error, 3 inconclusive, 4 invariant violation.
impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Inconclusive => 3,
            RunError::Invariant(_) => 4,
            // Verdict errors surface misconfigured scoring setups.
            RunError::Verdict(_) | RunError::Estimate(_) | RunError::Protocol(_) => 2,
            RunError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qpv",
    about = "Simulator and analysis toolkit for commitment-based quantum position verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the master seed from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override the trial count from the config.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Output directory for reports.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Run seeded protocol trials and emit a summary plus transcripts.
    Simulate,
    /// Emit the closed-form bounds, budgets and detection floors.
    Bounds,
    /// Emit the engineering parameter table over a transmission sweep.
    Estimate,
    /// Run the randomized quantum verification suites.
    VerifyLemmas,
    /// Sweep the mismatch rate and pair empirical detection with bounds.
    Sweep,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, RunError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| RunError::Invariant(format!("serialization: {e}")))?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, RunError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| RunError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    Ok(cfg)
}

/// Executes a parsed command line; returns the artifacts' exit code.
pub fn execute(cli: &Cli) -> Result<i32, RunError> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Simulate => {
            let output = run::simulate(&cfg, cli.workers)?;
            let summary_path = write_json(&cli.out_dir, "summary.json", &output.summary)?;
            let transcript_path =
                write_text(&cli.out_dir, "transcript.csv", &output.transcript_csv)?;
            println!(
                "simulate: {}/{} trials accepted (frequency {:.4}), {} inconclusive",
                output.summary.accepted,
                output.summary.trials,
                output.summary.accept_frequency,
                output.summary.inconclusive_trials
            );
            println!(
                "wrote {} and {}",
                summary_path.display(),
                transcript_path.display()
            );
            Ok(if output.summary.inconclusive_trials > 0 {
                3
            } else {
                0
            })
        }
        Command::Bounds => {
            let report = run::bounds_report(&cfg)?;
            let path = write_json(&cli.out_dir, "bounds.json", &report)?;
            println!(
                "bounds: model {:?}, k = {}, committed rounds {}, μ = {:.4}",
                report.model, report.k, report.committed_rounds, report.mu
            );
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Estimate => {
            let report = run::estimate(&cfg)?;
            let json_path = write_json(&cli.out_dir, "estimate.json", &report)?;
            let csv_path = write_text(&cli.out_dir, "estimate.csv", &report.to_csv())?;
            println!("estimate: {} rows", report.rows.len());
            println!("wrote {} and {}", json_path.display(), csv_path.display());
            Ok(0)
        }
        Command::VerifyLemmas => {
            let report = run::verify_lemmas(&cfg);
            let path = write_json(&cli.out_dir, "lemmas.json", &report)?;
            for suite in &report.suites {
                println!(
                    "{}: {} instances, {} violations (worst margin {:.2e}) — {}",
                    suite.name,
                    suite.instances,
                    suite.violations,
                    suite.worst_margin,
                    if suite.passed { "ok" } else { "VIOLATION" }
                );
            }
            println!("wrote {}", path.display());
            Ok(if report.all_passed { 0 } else { 4 })
        }
        Command::Sweep => {
            let report = run::sweep(&cfg, cli.workers)?;
            let json_path = write_json(&cli.out_dir, "sweep.json", &report)?;
            let csv_path = write_text(&cli.out_dir, "sweep.csv", &report.to_csv())?;
            println!("sweep: {} parameter points", report.rows.len());
            println!("wrote {} and {}", json_path.display(), csv_path.display());
            Ok(0)
        }
    }
}
