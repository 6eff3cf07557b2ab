use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dispersion_lab::experiments::{list_experiments, run, ExperimentConfig};
use dispersion_lab::{LabError, Result};

/// Run a named dispersion-lab experiment and write its CSV and JSON outputs.
#[derive(Parser)]
#[command(name = "lab", version)]
struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment name (overrides the config).
    #[arg(long)]
    experiment: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory (default: $DISPERSION_LAB_OUT, then ./out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Print the experiment catalog and exit.
    #[arg(long)]
    list: bool,
}

fn execute(cli: Cli) -> Result<()> {
    if cli.list {
        let mut out = std::io::stdout().lock();
        for line in list_experiments() {
            if writeln!(out, "{line}").is_err() {
                break;
            }
        }
        return Ok(());
    }
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(name) = cli.experiment {
        cfg.experiment = name;
    }
    if cfg.experiment.is_empty() {
        return Err(LabError::Config("no experiment given (use --experiment or --list)".into()));
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if cli.trials.is_some() {
        cfg.trials = cli.trials;
    }
    if cli.out_dir.is_some() {
        cfg.out_dir = cli.out_dir;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    let (out, csv, json) = run(&cfg)?;
    let s = &out.summary;
    println!("{} (config {}, seed {})", s.experiment, s.provenance.config_hash, s.provenance.master_seed);
    for r in &s.stats.rungs {
        println!(
            "  n_max {:>5}  trials {:>5}  mean {:.6e}  se {:.3e}  median {:.6e}",
            r.n_max, r.trials, r.mean, r.std_error, r.median
        );
    }
    for (k, v) in &s.metrics {
        println!("  {k} = {v}");
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
