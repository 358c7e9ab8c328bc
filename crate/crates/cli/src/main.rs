// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qspsim_cli::{run, Command, RunOptions};

#[derive(Parser)]
#[command(name = "qspsim", version, about = "Hamiltonian simulation with quantum signal processing")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Heisenberg chain in a constant field
    HeisenbergTi(Common),
    /// Heisenberg chain in a linearly ramped field, Trotterized
    HeisenbergTd(Common),
    /// Charge oscillation in H2
    H2(Common),
    /// Query-count sweeps over time and accuracy
    Complexity(Common),
    /// Error report for the polynomial approximations
    Approx(Common),
    /// Synthesize and print phases for one target
    Phases(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set model.alpha=2`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for phase-synthesis restarts
    #[arg(long)]
    seed: Option<u64>,
    /// Recompute phases instead of reading the cache
    #[arg(long)]
    no_cache: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, c) = match cli.command {
        Sub::HeisenbergTi(c) => (Command::HeisenbergTi, c),
        Sub::HeisenbergTd(c) => (Command::HeisenbergTd, c),
        Sub::H2(c) => (Command::H2, c),
        Sub::Complexity(c) => (Command::Complexity, c),
        Sub::Approx(c) => (Command::Approx, c),
        Sub::Phases(c) => (Command::Phases, c),
    };
    let opts = RunOptions { config: c.config, sets: c.sets, out: c.out, seed: c.seed, no_cache: c.no_cache };
    match run(cmd, &opts) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qspsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
