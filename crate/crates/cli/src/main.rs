//! `trajclean`: batch ground-truth labelling, outlier detection, scoring and
//! synthetic data generation over CSV trajectory datasets.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "trajclean", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write ground-truth labels from the sensor cross-check.
    Label(CommonArgs),
    /// Write predicted labels for every configured detector.
    Detect(CommonArgs),
    /// Label, detect and score; writes reports and a run manifest.
    Eval(CommonArgs),
    /// Generate a synthetic dataset with labelled outliers.
    Synth(SynthArgs),
}

#[derive(Args, Clone, Default)]
pub struct CommonArgs {
    /// Run configuration file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for detector runs.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Use this single dataset instead of the configured ones.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Column mapping for `--dataset` (defaults to the synth schema).
    #[arg(long, requires = "dataset")]
    pub mapping: Option<PathBuf>,
    /// Truth labels for `--dataset`.
    #[arg(long, requires = "dataset")]
    pub truth: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of trajectories.
    #[arg(long)]
    pub trajectories: Option<usize>,
    /// Points per trajectory.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub outlier_rate: Option<f64>,
    /// Outlier displacement, meters.
    #[arg(long)]
    pub displacement: Option<f64>,
    /// Position noise sigma, meters.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Base speed, m/s.
    #[arg(long)]
    pub speed: Option<f64>,
    /// Sampling interval, seconds.
    #[arg(long)]
    pub interval: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Label(a) => commands::label(&a),
        Command::Detect(a) => commands::detect(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Synth(a) => commands::synth(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("trajclean: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
