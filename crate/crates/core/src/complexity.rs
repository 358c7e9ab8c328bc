// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form query counts for QSP-LCU, QSP-LCU+AA, QSP-LCU+ROAA and coherent one-shot.

use std::f64::consts::{E, PI};
use std::fmt;

use crate::error::{domain, Result};
use crate::format::sig12;
use crate::numerics::lambert_w;
use crate::polyapprox::truncation_index;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Lcu,
    Aa,
    Roaa,
    OneShot,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Lcu, Algorithm::Aa, Algorithm::Roaa, Algorithm::OneShot];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Lcu => "lcu",
            Algorithm::Aa => "aa",
            Algorithm::Roaa => "roaa",
            Algorithm::OneShot => "os",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub algorithm: Algorithm,
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub queries: u64,
}

fn unit_open(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return domain(format!("{name} must lie in (0, 1), got {v}"));
    }
    Ok(())
}

/// Odd degree of the sign polynomial: `2 ceil(max(b1, b2)) + 1` with the two Lambert-W branches.
pub fn gamma(epsilon: f64, delta: f64) -> Result<usize> {
    unit_open("epsilon", epsilon)?;
    unit_open("Delta", delta)?;
    let e2 = epsilon * epsilon;
    let w1 = lambert_w(8.0 / (PI * e2))?;
    let w2 = lambert_w(512.0 / (E * E * PI * e2))?;
    let b1 = E / delta * (w1 * w2).sqrt();
    let b2 = 2f64.sqrt() * lambert_w(8.0 * 2f64.sqrt() / (PI.sqrt() * delta * epsilon) * w1.sqrt())?;
    Ok(2 * b1.max(b2).ceil() as usize + 1)
}

/// `4 floor(r(e alpha |t| / 2, 5 eps / 16) / 2) + 1`.
pub fn n_lcu(epsilon: f64, t: f64, alpha: f64) -> Result<u64> {
    Ok(4 * truncation_index(alpha * t, epsilon / 4.0)? as u64 + 1)
}

/// `gamma(delta/2, 1 - eps) * N_LCU(eps)`.
pub fn n_aa(epsilon: f64, delta: f64, t: f64, alpha: f64) -> Result<u64> {
    unit_open("delta", delta)?;
    unit_open("epsilon", epsilon)?;
    Ok(gamma(delta / 2.0, 1.0 - epsilon)? as u64 * n_lcu(epsilon, t, alpha)?)
}

/// `3 N_LCU(2 eps / 5)`.
pub fn n_roaa(epsilon: f64, t: f64, alpha: f64) -> Result<u64> {
    Ok(3 * n_lcu(0.4 * epsilon, t, alpha)?)
}

/// `2 floor(r(e alpha |t| / beta, 5 eps / 24) / 2) + gamma(eps/3, 1 - beta) + 1`.
pub fn n_os(epsilon: f64, beta: f64, t: f64, alpha: f64) -> Result<u64> {
    unit_open("beta", beta)?;
    let k = truncation_index(2.0 * t * alpha / beta, epsilon / 6.0)? as u64;
    Ok(2 * k + gamma(epsilon / 3.0, 1.0 - beta)? as u64 + 1)
}

/// `L * N_OS(eps / L; t / L)`: each of the `L` slices gets an equal share of the error budget.
pub fn n_os_trotter(epsilon: f64, delta: f64, t: f64, steps: usize, alpha: f64, beta: f64) -> Result<u64> {
    if steps == 0 {
        return domain("Trotter step count must be at least 1");
    }
    unit_open("delta", delta)?;
    let l = steps as f64;
    Ok(steps as u64 * n_os(epsilon / l, beta, t / l, alpha)?)
}

/// Query count of `algo` with `delta = 2 eps` where the algorithm needs a failure budget.
pub fn queries(algo: Algorithm, epsilon: f64, delta: f64, t: f64, alpha: f64, beta: f64) -> Result<u64> {
    match algo {
        Algorithm::Lcu => n_lcu(epsilon, t, alpha),
        Algorithm::Aa => n_aa(epsilon, delta, t, alpha),
        Algorithm::Roaa => n_roaa(epsilon, t, alpha),
        Algorithm::OneShot => n_os(epsilon, beta, t, alpha),
    }
}

/// Rows for every algorithm over `t_values x epsilon_values`, ordered by algorithm, then
/// `t`, then `epsilon`, both ascending. `delta = 2 epsilon`.
pub fn complexity_table(
    t_values: &[f64],
    epsilon_values: &[f64],
    alpha: f64,
    beta: f64,
) -> Result<Vec<ComplexityReport>> {
    let mut ts = t_values.to_vec();
    let mut es = epsilon_values.to_vec();
    ts.sort_by(f64::total_cmp);
    es.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(4 * ts.len() * es.len());
    for algo in Algorithm::ALL {
        for &t in &ts {
            for &epsilon in &es {
                let delta = 2.0 * epsilon;
                rows.push(ComplexityReport {
                    algorithm: algo,
                    t,
                    alpha,
                    beta,
                    epsilon,
                    delta,
                    queries: queries(algo, epsilon, delta, t, alpha, beta)?,
                });
            }
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "algorithm,t,alpha,beta,epsilon,delta,queries";

pub fn to_csv(rows: &[ComplexityReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.algorithm,
            sig12(r.t),
            sig12(r.alpha),
            sig12(r.beta),
            sig12(r.epsilon),
            sig12(r.delta),
            r.queries
        ));
    }
    out
}
