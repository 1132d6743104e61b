use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fogcache_cli::{run, CliError, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "fogcache", version, about = "Online edge caching in fog radio access networks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed of the sim section.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output prefix.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Closed-form long-term NDTs.
    Analytic,
    /// LP lower bounds and the online/offline envelope.
    Bounds,
    /// Monte Carlo simulation.
    Simulate,
    /// All three of the above.
    SweepAll,
}

fn execute(cli: &Cli) -> Result<Vec<fogcache_cli::commands::Written>, CliError> {
    let Some(path) = &cli.config else {
        return Err(CliError::Config(fogcache_cli::ConfigError::Invalid {
            field: "--config".into(),
            message: "a config file is required".into(),
        }));
    };
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.override_seed(seed);
    }
    if let Some(out) = &cli.out {
        config.outputs = out.clone();
    }
    config.validate()?;
    let command = match cli.command {
        Cmd::Analytic => Command::Analytic,
        Cmd::Bounds => Command::Bounds,
        Cmd::Simulate => Command::Simulate,
        Cmd::SweepAll => Command::SweepAll,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Io { path: PathBuf::from("<thread pool>"), source: std::io::Error::other(e) })?;
    pool.install(|| run(&config, command))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(written) => {
            for w in written {
                println!("{}\t{}", w.csv.display(), w.meta.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fogcache: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
