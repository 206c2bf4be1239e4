use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use dqd_sim::cli::{cmd_evolve, cmd_noise_trace, cmd_spectrum, cmd_sweep, SweepMode};
use dqd_sim::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "dqd-sim",
    version,
    about = "Entanglement dynamics of two coupled singlet-triplet qubits under telegraph noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one telegraph noise realization as CSV.
    NoiseTrace(Common),
    /// Write averaged power spectra (one file per correlation time).
    Spectrum(Common),
    /// Run the ensemble and write DDSE/concurrence time series.
    Evolve(Common),
    /// Sweep max concurrence over coupling ratio or preparation time.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// What to sweep: the values list is read from the config.
        #[arg(long, value_enum)]
        mode: SweepMode,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; master_seed is mandatory.
    #[arg(long)]
    config: PathBuf,
    /// Output file prefix.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    workers: Option<usize>,
}

fn run(cli: Cli) -> dqd_sim::Result<Vec<PathBuf>> {
    let (common, mode) = match &cli.command {
        Command::NoiseTrace(c) | Command::Spectrum(c) | Command::Evolve(c) => (c, None),
        Command::Sweep { common, mode } => (common, Some(*mode)),
    };
    let cfg = RunConfig::from_path(&common.config)?;

    let workers = common.workers.or(cfg.workers);
    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| dqd_sim::Error::Config(format!("worker pool: {e}")))?;
    }
    let prefix = common
        .out
        .clone()
        .or_else(|| cfg.out_prefix.clone())
        .unwrap_or_else(|| "out".into());

    match (&cli.command, mode) {
        (Command::NoiseTrace(_), _) => cmd_noise_trace(&cfg, &prefix),
        (Command::Spectrum(_), _) => cmd_spectrum(&cfg, &prefix),
        (Command::Evolve(_), _) => cmd_evolve(&cfg, &prefix),
        (Command::Sweep { .. }, Some(mode)) => cmd_sweep(&cfg, mode, &prefix),
        (Command::Sweep { .. }, None) => unreachable!("sweep always carries a mode"),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
