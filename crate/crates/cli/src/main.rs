//! `synthcal` command line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use synthcal::pipeline::{cmd_calibrate, cmd_evaluate, cmd_generate, cmd_pipeline};
use synthcal::{CalibrationMethod, Error, PipelineConfig, Result, RunManifest};

/// Hybrid synthetic tabular data generation with post-hoc calibration.
#[derive(Debug, Parser)]
#[command(name = "synthcal", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the five generators, learn mixture weights and write the hybrid.
    Generate(RunArgs),
    /// Calibrate a synthetic CSV toward the real training marginals.
    Calibrate(RunArgs),
    /// Evaluate a synthetic CSV against the real data.
    Evaluate(RunArgs),
    /// Generate, apply every calibration method and evaluate each.
    Pipeline(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Calibration method: raw, moment, full, soft, adaptive or iterative.
    #[arg(long)]
    method: Option<String>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Synthetic CSV read by `calibrate` and `evaluate`.
    #[arg(long)]
    input: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<PipelineConfig> {
        let mut config = PipelineConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(method) = &self.method {
            config.calibration.method = method.parse::<CalibrationMethod>()?;
        }
        if let Some(out) = &self.out {
            config.out_dir = out.clone();
        }
        if let Some(input) = &self.input {
            config.input = Some(input.clone());
        }
        Ok(config)
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("SYNTHCAL_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Error::Config(format!(
                "SYNTHCAL_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))
}

fn run(cli: Cli) -> Result<RunManifest> {
    configure_threads()?;
    let (args, f): (&RunArgs, fn(&PipelineConfig) -> Result<RunManifest>) = match &cli.command {
        Command::Generate(a) => (a, cmd_generate),
        Command::Calibrate(a) => (a, cmd_calibrate),
        Command::Evaluate(a) => (a, cmd_evaluate),
        Command::Pipeline(a) => (a, cmd_pipeline),
    };
    let config = args.load()?;
    let manifest = f(&config)?;
    println!(
        "{}: wrote {} files to {}",
        manifest.command,
        manifest.outputs.len(),
        config.out_dir.display()
    );
    for w in &manifest.warnings {
        log::warn!("{w}");
    }
    Ok(manifest)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
