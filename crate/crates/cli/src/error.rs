// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

use qspsim_core::QspError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("phase synthesis did not converge: {0}")]
    Synthesis(String),
    #[error(transparent)]
    Numerical(#[from] QspError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit status: 2 config, 3 synthesis, 4 numerical contract, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Synthesis(_) => 3,
            CliError::Numerical(QspError::Io(_)) => 1,
            CliError::Numerical(QspError::Parse { .. }) => 2,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
