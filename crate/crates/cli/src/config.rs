// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Flat `section.key = value` configuration files with command-line overrides.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use qspsim_core::format::sig12;

use crate::error::{CliError, CliResult};

/// Raw key-value pairs, later entries overriding earlier ones only through `set`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.split('.').all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
}

impl Config {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let k = k.trim();
            if !valid_key(k) {
                return Err(CliError::Config(format!("line {}: bad key {k:?}", i + 1)));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key {k}", i + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> CliResult<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {assignment:?}")))?;
        let k = k.trim();
        if !valid_key(k) {
            return Err(CliError::Config(format!("bad key {k:?}")));
        }
        self.entries.insert(k.to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Typed access that records every effective value, so the full configuration (defaults
/// included) can be echoed into output headers, and rejects keys nobody read.
pub struct Reader<'a> {
    config: &'a Config,
    seen: RefCell<Vec<(String, String)>>,
    quiet: RefCell<Vec<String>>,
}

impl<'a> Reader<'a> {
    pub fn new(config: &'a Config) -> Self {
        Self { config, seen: RefCell::new(Vec::new()), quiet: RefCell::new(Vec::new()) }
    }

    fn record(&self, key: &str, shown: String) {
        self.seen.borrow_mut().push((key.to_string(), shown));
    }

    fn parsed<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.config.get(key) {
            None => Ok(None),
            Some(raw) => {
                raw.parse::<T>().map(Some).map_err(|_| CliError::Config(format!("{key}: cannot parse {raw:?}")))
            }
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> CliResult<f64> {
        let v = self.parsed::<f64>(key)?.unwrap_or(default);
        if !v.is_finite() {
            return Err(CliError::Config(format!("{key} must be finite")));
        }
        self.record(key, sig12(v));
        Ok(v)
    }

    pub fn usize(&self, key: &str, default: usize) -> CliResult<usize> {
        let v = self.parsed::<usize>(key)?.unwrap_or(default);
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn u64(&self, key: &str, default: u64) -> CliResult<u64> {
        let v = self.parsed::<u64>(key)?.unwrap_or(default);
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn bool(&self, key: &str, default: bool) -> CliResult<bool> {
        let v = self.parsed::<bool>(key)?.unwrap_or(default);
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn string(&self, key: &str, default: &str) -> CliResult<String> {
        let v = self.config.get(key).unwrap_or(default).to_string();
        self.record(key, v.clone());
        Ok(v)
    }

    /// A string that does not affect results (a cache location, say) and is left out of the echo.
    pub fn string_quiet(&self, key: &str, default: &str) -> String {
        self.quiet.borrow_mut().push(key.to_string());
        self.config.get(key).unwrap_or(default).to_string()
    }

    /// Comma-separated list of floats.
    pub fn f64_list(&self, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        let v = match self.config.get(key) {
            None => default.to_vec(),
            Some(raw) => raw
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Config(format!("{key}: expected comma-separated numbers, got {raw:?}")))?,
        };
        self.record(key, v.iter().map(|x| sig12(*x)).collect::<Vec<_>>().join(","));
        Ok(v)
    }

    /// Fails on keys that were never read.
    pub fn finish(self) -> CliResult<Vec<(String, String)>> {
        let seen = self.seen.into_inner();
        let quiet = self.quiet.into_inner();
        for k in self.config.keys() {
            if !seen.iter().any(|(s, _)| s == k) && !quiet.iter().any(|q| q == k) {
                return Err(CliError::Config(format!("unknown key {k}")));
            }
        }
        Ok(seen)
    }
}
