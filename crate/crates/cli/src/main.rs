//! `eik` — entropic inference kit CLI.
//!
//! Usage: `eik <kind> --config path.json [--out path.csv] [--seed N] [--tol X]`
//! with `EIK_LOG={error|info|debug}` controlling log verbosity.
//!
//! Exit codes: 0 success, 1 computation failed, 2 invalid configuration.

mod config;
mod experiments;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    #[value(name = "classical-maxent")]
    ClassicalMaxent,
    #[value(name = "qmaxent")]
    Qmaxent,
    #[value(name = "qbr")]
    Qbr,
    #[value(name = "spin-demo")]
    SpinDemo,
    #[value(name = "ed-sim")]
    EdSim,
    #[value(name = "weak-demo")]
    WeakDemo,
    #[value(name = "thermal")]
    Thermal,
    #[value(name = "noncommute-demo")]
    NoncommuteDemo,
}

impl Kind {
    fn as_str(&self) -> &'static str {
        match self {
            Kind::ClassicalMaxent => "classical-maxent",
            Kind::Qmaxent => "qmaxent",
            Kind::Qbr => "qbr",
            Kind::SpinDemo => "spin-demo",
            Kind::EdSim => "ed-sim",
            Kind::WeakDemo => "weak-demo",
            Kind::Thermal => "thermal",
            Kind::NoncommuteDemo => "noncommute-demo",
        }
    }
}

/// Entropic inference experiments: MaxEnt updates of distributions and
/// density matrices, measurement rules, lattice dynamics, and weak values.
#[derive(Debug, Parser)]
#[command(name = "eik", version)]
struct Cli {
    /// Experiment kind.
    #[arg(value_enum)]
    kind: Kind,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// CSV output path (overrides `output_path` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Solver tolerance override.
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EIK_LOG", "error")).init();
    let cli = Cli::parse();

    let raw = match std::fs::read_to_string(&cli.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!(
                "error: config invalid: cannot read {}: {e}",
                cli.config.display()
            );
            return ExitCode::from(2);
        }
    };
    let config = match config::validate_config(cli.kind.as_str(), &raw) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    log::info!(
        "running {} from {}",
        cli.kind.as_str(),
        cli.config.display()
    );

    let outcome = match experiments::run_experiment(&config, cli.seed, cli.tol) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: computation failed: {e}");
            return ExitCode::from(1);
        }
    };

    let out_path = cli.out.or(config.output_path);
    if let Some(path) = &out_path {
        if let Err(e) = outcome.table.write_csv(path) {
            eprintln!("error: computation failed: {e}");
            return ExitCode::from(1);
        }
        log::info!("wrote {}", path.display());
    }
    println!("{}", outcome.summary);
    ExitCode::SUCCESS
}
