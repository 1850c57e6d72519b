use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use svv_cli::{execute, Command, Options};

#[derive(Parser)]
#[command(name = "svv", version, about = "Stochastic vanishing-viscosity laboratory for 1D isentropic gas dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run an ensemble at one viscosity.
    Simulate(Common),
    /// Run the ensemble for every viscosity of the sweep block and analyse the Young measures.
    SweepEpsilon(Common),
    /// Tabulate an entropy pair on a (rho, u) grid.
    EntropyTable(Common),
    /// Analyse the trajectories listed in a sweep manifest.
    YoungMeasure {
        #[command(flatten)]
        common: Common,
        /// Trajectory manifest (default: trajectories.json in the output directory).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Check a configuration without running it.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Overrides SVV_OUTPUT_DIR and the config's output_dir.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn options(c: Common, manifest: Option<PathBuf>) -> Options {
    Options {
        config: c.config,
        seed: c.seed,
        samples: c.samples,
        jobs: c.jobs,
        output_dir: c.output_dir,
        manifest,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, opts) = match cli.command {
        Sub::Simulate(c) => (Command::Simulate, options(c, None)),
        Sub::SweepEpsilon(c) => (Command::SweepEpsilon, options(c, None)),
        Sub::EntropyTable(c) => (Command::EntropyTable, options(c, None)),
        Sub::YoungMeasure { common, manifest } => (Command::YoungMeasure, options(common, manifest)),
        Sub::Validate(c) => (Command::Validate, options(c, None)),
    };
    match execute(cmd, &opts) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let json = e.to_json();
            eprintln!("{json}");
            if let Some(dir) = &e.output_dir {
                if dir.is_dir() {
                    let _ = std::fs::write(dir.join("error.json"), format!("{json}\n"));
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
