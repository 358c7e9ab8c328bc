// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QspError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("empty Pauli sum")]
    EmptySum,
    #[error("degenerate outcome: {0}")]
    Degenerate(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, QspError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(QspError::Domain(msg.into()))
}
