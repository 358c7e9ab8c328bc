// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! On-disk cache of synthesized phase vectors, keyed by a SHA-256 digest of the request.

use std::fs;
use std::path::{Path, PathBuf};

use qspsim_core::qsp::SynthesisResult;
use qspsim_core::PhaseVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything that determines a synthesis result.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheKey {
    /// Target function or polynomial, with parameters printed in round-trip precision.
    pub target: String,
    pub degree: usize,
    pub basis: String,
    pub tolerance: f64,
    pub seed: u64,
}

impl CacheKey {
    pub fn digest(&self) -> String {
        let text = format!(
            "target={}\ndegree={}\nbasis={}\ntolerance={:e}\nseed={}\n",
            self.target, self.degree, self.basis, self.tolerance, self.seed
        );
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    phases: Vec<f64>,
    achieved_error: f64,
    iterations: usize,
    converged: bool,
}

/// A cache directory, or `None` to always recompute.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCache {
    dir: Option<PathBuf>,
}

impl PhaseCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir }
    }

    pub fn disabled() -> Self {
        Self { dir: None }
    }

    fn path(&self, key: &CacheKey) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{}.json", key.digest())))
    }

    /// Unreadable or malformed entries count as misses.
    pub fn get(&self, key: &CacheKey) -> Option<SynthesisResult> {
        let text = fs::read_to_string(self.path(key)?).ok()?;
        let e: Entry = serde_json::from_str(&text).ok()?;
        Some(SynthesisResult {
            phases: PhaseVector::wx(e.phases).ok()?,
            achieved_error: e.achieved_error,
            iterations: e.iterations,
            converged: e.converged,
        })
    }

    /// Best effort: a failed write only costs a recomputation later.
    pub fn put(&self, key: &CacheKey, result: &SynthesisResult) {
        let Some(path) = self.path(key) else { return };
        let entry = Entry {
            phases: result.phases.to_wx().phases().to_vec(),
            achieved_error: result.achieved_error,
            iterations: result.iterations,
            converged: result.converged,
        };
        let Ok(text) = serde_json::to_string(&entry) else { return };
        let _ = write_atomic(&path, &text);
    }

    /// Returns the cached result or computes and stores it.
    pub fn get_or_compute<E>(
        &self,
        key: &CacheKey,
        compute: impl FnOnce() -> Result<SynthesisResult, E>,
    ) -> Result<SynthesisResult, E> {
        if let Some(hit) = self.get(key) {
            return Ok(hit);
        }
        let r = compute()?;
        self.put(key, &r);
        Ok(r)
    }
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, text)?;
    fs::rename(tmp, path)
}
