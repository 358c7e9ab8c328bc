// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Experiment drivers behind the `qspsim` binary.

pub mod cache;
pub mod config;
pub mod error;
pub mod experiments;

use std::fs;
use std::path::{Path, PathBuf};

use config::Config;
use error::{CliError, CliResult};
use experiments::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    HeisenbergTi,
    HeisenbergTd,
    H2,
    Complexity,
    Approx,
    Phases,
}

impl Command {
    /// Whether the command synthesizes phases, and so reads the seed and the cache.
    pub fn synthesizes(self) -> bool {
        !matches!(self, Command::Complexity | Command::Approx)
    }

    /// Output file used when `--out` is not given. Phases go to stdout instead.
    pub fn default_out(self) -> Option<&'static str> {
        match self {
            Command::HeisenbergTi => Some("heisenberg_ti.csv"),
            Command::HeisenbergTd => Some("heisenberg_td.csv"),
            Command::H2 => Some("h2.csv"),
            Command::Complexity => Some("complexity.csv"),
            Command::Approx => Some("approx_report.json"),
            Command::Phases => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub sets: Vec<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub no_cache: bool,
}

/// Config file, then `--set` overrides, then `--seed` for commands that use it.
pub fn effective_config(cmd: Command, opts: &RunOptions) -> CliResult<Config> {
    let mut c = match &opts.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for s in &opts.sets {
        c.set(s)?;
    }
    if let Some(seed) = opts.seed.filter(|_| cmd.synthesizes()) {
        c.set(&format!("synthesis.seed={seed}"))?;
    }
    Ok(c)
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes the CSV to `out` and the summary next to it with a `.json` extension.
fn write_report(report: &Report, out: &Path) -> CliResult<Vec<PathBuf>> {
    match report.csv_with_header() {
        Some(csv) => {
            let json = out.with_extension("json");
            write(out, &csv)?;
            write(&json, &report.summary_text())?;
            Ok(vec![out.to_path_buf(), json])
        }
        None => {
            write(out, &report.summary_text())?;
            Ok(vec![out.to_path_buf()])
        }
    }
}

/// Runs one command; returns the text to print on stdout.
pub fn run(cmd: Command, opts: &RunOptions) -> CliResult<String> {
    let config = effective_config(cmd, opts)?;
    let report = match cmd {
        Command::HeisenbergTi => experiments::run_heisenberg_ti(&config, opts.no_cache)?,
        Command::HeisenbergTd => experiments::run_heisenberg_td(&config, opts.no_cache)?,
        Command::H2 => experiments::run_h2(&config, opts.no_cache)?,
        Command::Complexity => experiments::run_complexity_sweep(&config)?,
        Command::Approx => experiments::run_approx_report(&config)?,
        Command::Phases => {
            let text = experiments::run_phases(&config, opts.no_cache)?.text;
            return match &opts.out {
                Some(p) => {
                    write(p, &text)?;
                    Ok(format!("wrote {}\n", p.display()))
                }
                None => Ok(text),
            };
        }
    };
    let out = opts.out.clone().unwrap_or_else(|| PathBuf::from(cmd.default_out().expect("reports have a default")));
    let written = write_report(&report, &out)?;
    Ok(written.iter().map(|p| format!("wrote {}\n", p.display())).collect())
}
