use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use holosense::harness::{run_sweep, write_results_csv, SimulationConfig, SweepVariable};

/// Monte Carlo NMSE sweeps for intensity-only channel estimation.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// JSON scenario configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,

    /// Master seed; overrides the config.
    #[arg(long)]
    seed: u64,

    /// Swept variable; overrides the config.
    #[arg(long, value_parser = ["snr", "k", "rb"])]
    sweep: Option<String>,

    /// Trials per sweep point; overrides the config.
    #[arg(long)]
    trials: Option<usize>,

    /// Worker threads (0 uses every core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();

    let mut config = SimulationConfig::load(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    config.seed = args.seed;
    if let Some(s) = &args.sweep {
        config.set_sweep_variable(s.parse::<SweepVariable>()?);
    }
    if let Some(n) = args.trials {
        config.trials = n;
    }

    let rows = run_sweep(&config, args.workers)?;
    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_results_csv(&rows, BufWriter::new(file))?;
    log::info!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}
