// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Experiment drivers. Each returns the CSV text and a JSON summary; writing them out is
//! left to the caller.

use std::path::PathBuf;

use qspsim_core::algorithms::{
    eece_phase_error, exact_evolution_td, expectation_sigma_z, ideal_trotter_states, lcu_phase_error,
    occupation_number, one_shot, qsp_lcu_roaa, trotter_evolve, StepAlgorithm, StepConfig, TimeDependentSpec,
};
use qspsim_core::complexity::{complexity_table, Algorithm, ComplexityReport};
use qspsim_core::encoding::{
    dilation_encoding, heisenberg_hamiltonian, load_pauli_sum, parse_pauli_sum, pauli_sum_to_matrix,
    pretransform_encoding,
};
use qspsim_core::format::sig12;
use qspsim_core::numerics::{hermitian_eig, identity, matrix_exp_hermitian, spectral_norm};
use qspsim_core::polyapprox::{
    eece_poly, jacobi_anger_cos, jacobi_anger_cos_degree, jacobi_anger_sin, jacobi_anger_sin_degree, measure_error,
    sign_poly, Target, GRID_POINTS,
};
use qspsim_core::qsp::{synthesize_function, synthesize_phases_with, SynthesisOptions, SynthesisResult};
use qspsim_core::{Basis, ChebyshevPolynomial, ComplexMatrix, Interval, PauliSum, PhaseVector, Statevector, C64};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cache::{CacheKey, PhaseCache};
use crate::config::{Config, Reader};
use crate::error::{CliError, CliResult};

/// The shipped H2 (STO-3G, 0.5 Angstrom) Hamiltonian.
pub const H2_PAULI: &str = include_str!("../../../data/h2_sto3g_r0.5.pauli");
/// Atomic units of time to femtoseconds.
pub const FS_PER_AU: f64 = 0.024_188_842_54;
/// Success probability below which H2 rows are flagged.
pub const LOW_CONFIDENCE: f64 = 0.85;

/// Slack added to a measured polynomial error when it is declared as the algorithm's budget.
const EPSILON_MARGIN: f64 = 1e-9;

/// What an experiment produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub name: &'static str,
    /// `key = value` lines of the effective configuration.
    pub echo: Vec<(String, String)>,
    /// CSV header and rows, without comment lines.
    pub csv: Option<String>,
    pub summary: Value,
}

impl Report {
    /// CSV preceded by `#` comment lines echoing the configuration.
    pub fn csv_with_header(&self) -> Option<String> {
        let body = self.csv.as_ref()?;
        let mut out = format!("# qspsim {}\n", self.name);
        for (k, v) in &self.echo {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(body);
        Some(out)
    }

    pub fn summary_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary is plain JSON");
        s.push('\n');
        s
    }
}

/// Options shared by every synthesis in a run.
#[derive(Debug, Clone)]
pub struct Synthesis {
    /// Target accuracy for function fits (fixed-degree exponentials).
    pub tolerance: f64,
    /// Target accuracy when the target is itself a polynomial.
    pub poly_tolerance: f64,
    /// Results further than this from their target abort the run.
    pub accept: f64,
    pub seed: u64,
    pub cache: PhaseCache,
}

impl Synthesis {
    pub fn read(r: &Reader, no_cache: bool, default_tolerance: f64) -> CliResult<Self> {
        let tolerance = r.f64("synthesis.tolerance", default_tolerance)?;
        let poly_tolerance = r.f64("synthesis.poly_tolerance", 1e-10)?;
        let accept = r.f64("synthesis.accept", 1.0)?;
        let seed = r.u64("synthesis.seed", 0)?;
        let dir = r.string_quiet("cache.dir", ".qspsim-cache");
        for (k, v) in [
            ("synthesis.tolerance", tolerance),
            ("synthesis.poly_tolerance", poly_tolerance),
            ("synthesis.accept", accept),
        ] {
            if !(v > 0.0) {
                return Err(CliError::Config(format!("{k} must be positive")));
            }
        }
        let cache =
            if no_cache || dir.is_empty() { PhaseCache::disabled() } else { PhaseCache::new(Some(PathBuf::from(dir))) };
        Ok(Self { tolerance, poly_tolerance, accept, seed, cache })
    }

    fn options(&self, tolerance: f64) -> SynthesisOptions {
        SynthesisOptions::new(tolerance).with_seed(self.seed)
    }

    fn check(&self, what: &str, r: SynthesisResult) -> CliResult<SynthesisResult> {
        if r.achieved_error > self.accept {
            return Err(CliError::Synthesis(format!(
                "{what}: error {:.3e} exceeds the acceptance limit {:.3e}",
                r.achieved_error, self.accept
            )));
        }
        Ok(r)
    }

    /// Phases for a polynomial target, cached under `label`.
    pub fn polynomial(&self, label: &str, poly: &ChebyshevPolynomial, basis: Basis) -> CliResult<SynthesisResult> {
        let key = CacheKey {
            target: label.to_string(),
            degree: poly.degree(),
            basis: basis.to_string(),
            tolerance: self.poly_tolerance,
            seed: self.seed,
        };
        let r = self.cache.get_or_compute(&key, || {
            synthesize_phases_with(poly, basis, &self.options(self.poly_tolerance)).map_err(CliError::from)
        })?;
        self.check(label, r)
    }

    /// Fixed-degree Jacobi-Anger cosine and sine phases at `tau`.
    pub fn lcu_pair(&self, tau: f64, d_cos: usize, d_sin: usize) -> CliResult<(PhaseVector, PhaseVector)> {
        let c = self.polynomial(
            &format!("jacobi_anger_cos tau={tau:e}"),
            &jacobi_anger_cos_degree(tau, d_cos)?,
            Basis::Hadamard,
        )?;
        let s = self.polynomial(
            &format!("jacobi_anger_sin tau={tau:e}"),
            &jacobi_anger_sin_degree(tau, d_sin)?,
            Basis::Hadamard,
        )?;
        Ok((c.phases, s.phases))
    }

    /// Degree-`degree` computational-basis phases for `e^{-i tau x}` on the pre-transformed
    /// spectrum `[(1 - beta)/2, (1 + beta)/2]`.
    pub fn exponential(&self, tau: f64, beta: f64, degree: usize) -> CliResult<SynthesisResult> {
        let iv = Interval::new(0.5 * (1.0 - beta), 0.5 * (1.0 + beta));
        let label = format!("exp(-i tau x) tau={tau:e} on [{:e}, {:e}]", iv.lo, iv.hi);
        let key = CacheKey {
            target: label.clone(),
            degree,
            basis: Basis::Computational.to_string(),
            tolerance: self.tolerance,
            seed: self.seed,
        };
        let target = move |x: f64| C64::from_polar(1.0, -tau * x);
        let r = self.cache.get_or_compute(&key, || {
            synthesize_function(&target, degree, Basis::Computational, &[iv], &self.options(self.tolerance))
                .map_err(CliError::from)
        })?;
        self.check(&label, r)
    }
}

fn declared(measured: f64) -> f64 {
    measured * (1.0 + EPSILON_MARGIN) + 1e-15
}

fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            (0..n).map(|i| if i == n - 1 { stop } else { start + (stop - start) * i as f64 / (n - 1) as f64 }).collect()
        }
    }
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.log10(), hi.log10(), n).into_iter().map(|e| 10f64.powf(e)).collect()
}

/// Least-squares line through `(xs, ys)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let intercept = my - slope * mx;
        let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let sst: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };
        Self { intercept, slope, r_squared }
    }

    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    fn json(&self) -> Value {
        json!({ "intercept": self.intercept, "slope": self.slope, "r_squared": self.r_squared })
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn csv_row(values: &[f64]) -> String {
    let mut s = values.iter().map(|v| sig12(*v)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

fn check_degrees(d_cos: usize, d_sin: usize, d_eece: usize) -> CliResult<()> {
    if d_cos % 2 != 0 || d_sin % 2 != 1 || d_eece % 2 != 0 || d_eece == 0 {
        return Err(CliError::Config(format!(
            "degrees need d_cos even, d_sin odd and d_eece even and positive; got {d_cos}, {d_sin}, {d_eece}"
        )));
    }
    Ok(())
}

fn check_scales(alpha: f64, beta: f64, norm: f64) -> CliResult<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(CliError::Config(format!("model.beta must lie in (0, 1), got {beta}")));
    }
    if !(alpha >= norm) {
        return Err(CliError::Config(format!("model.alpha = {alpha} is below the Hamiltonian norm {norm}")));
    }
    Ok(())
}

fn initial_state(bits: &str, qubits: usize) -> CliResult<Statevector> {
    if bits.len() != qubits || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(CliError::Config(format!("state.initial must be {qubits} bits, got {bits:?}")));
    }
    Ok(Statevector::from_bits(bits)?)
}

fn heisenberg(sites: usize, g: [f64; 3], h: f64) -> CliResult<PauliSum> {
    Ok(heisenberg_hamiltonian(sites, &vec![g; sites - 1], &vec![h; sites])?)
}

struct Degrees {
    cos: usize,
    sin: usize,
    eece: usize,
}

fn read_degrees(r: &Reader, cos: usize, sin: usize, eece: usize) -> CliResult<Degrees> {
    let d = Degrees {
        cos: r.usize("poly.d_cos", cos)?,
        sin: r.usize("poly.d_sin", sin)?,
        eece: r.usize("poly.d_eece", eece)?,
    };
    check_degrees(d.cos, d.sin, d.eece)?;
    Ok(d)
}

fn read_chain(r: &Reader) -> CliResult<(usize, [f64; 3])> {
    let sites = r.usize("model.sites", 2)?;
    if sites < 2 {
        return Err(CliError::Config("model.sites must be at least 2".into()));
    }
    let g = [r.f64("model.gx", 1.0)?, r.f64("model.gy", 0.0)?, r.f64("model.gz", 0.0)?];
    Ok((sites, g))
}

/// One simulated time point of a time-independent run.
struct Point {
    roaa: Statevector,
    os: Statevector,
    p_roaa: f64,
    p_os: f64,
    lcu_epsilon: f64,
    eece_epsilon: f64,
    op_err_roaa: f64,
    op_err_os: f64,
    eece_converged: bool,
}

/// ROAA and one-shot at time `t` for `H` (`h`), with the same `alpha`, `beta` and degrees.
fn simulate_point(
    h: &ComplexMatrix,
    psi0: &Statevector,
    t: f64,
    alpha: f64,
    beta: f64,
    deg: &Degrees,
    synth: &Synthesis,
) -> CliResult<Point> {
    let enc = dilation_encoding(h, alpha)?;
    let tau = alpha * t;
    let (pc, ps) = synth.lcu_pair(tau, deg.cos, deg.sin)?;
    let lcu_epsilon = lcu_phase_error(&pc, &ps, tau)?;
    let roaa = qsp_lcu_roaa(&enc, psi0, t, declared(lcu_epsilon), &pc, &ps)?;
    let tau_os = 2.0 * t * alpha / beta;
    let e = synth.exponential(tau_os, beta, deg.eece)?;
    let eece_epsilon = eece_phase_error(&e.phases, tau_os, beta)?;
    let pre = pretransform_encoding(&enc, beta)?;
    let os = one_shot(&pre, psi0, t, declared(eece_epsilon), beta, &e.phases)?;
    Ok(Point {
        roaa: roaa.final_state,
        os: os.final_state,
        p_roaa: roaa.success_probability,
        p_os: os.success_probability,
        lcu_epsilon,
        eece_epsilon,
        op_err_roaa: roaa.operator_error,
        op_err_os: os.operator_error,
        eece_converged: e.converged,
    })
}

fn evolve_exact(h: &ComplexMatrix, psi0: &Statevector, t: f64) -> CliResult<Statevector> {
    Ok(Statevector::new(matrix_exp_hermitian(h, t)? * &psi0.amplitudes)?)
}

fn point_diagnostics(points: &[Point]) -> Value {
    json!({
        "lcu_epsilon": points.iter().map(|p| p.lcu_epsilon).collect::<Vec<_>>(),
        "eece_epsilon": points.iter().map(|p| p.eece_epsilon).collect::<Vec<_>>(),
        "operator_error_roaa": points.iter().map(|p| p.op_err_roaa).collect::<Vec<_>>(),
        "operator_error_os": points.iter().map(|p| p.op_err_os).collect::<Vec<_>>(),
        "eece_unconverged": points.iter().filter(|p| !p.eece_converged).count(),
    })
}

/// Two-spin (by default) Heisenberg chain in a constant field: ROAA and one-shot against
/// exact evolution of the first spin's `<Z>`.
pub fn run_heisenberg_ti(config: &Config, no_cache: bool) -> CliResult<Report> {
    let r = Reader::new(config);
    let (sites, g) = read_chain(&r)?;
    let hfield = r.f64("model.h", 0.5)?;
    let alpha = r.f64("model.alpha", 1.5)?;
    let beta = r.f64("model.beta", 0.4)?;
    let deg = read_degrees(&r, 6, 5, 32)?;
    let times = linspace(r.f64("time.start", 0.0)?, r.f64("time.stop", 3.5)?, r.usize("time.points", 36)?);
    let bits = r.string("state.initial", &"0".repeat(sites))?;
    let site = r.usize("observable.site", 0)?;
    let synth = Synthesis::read(&r, no_cache, 1e-2)?;
    let echo = r.finish()?;
    if times.iter().any(|t| *t < 0.0) {
        return Err(CliError::Config("times must be non-negative".into()));
    }
    if site >= sites {
        return Err(CliError::Config(format!("observable.site {site} out of range")));
    }
    let h = pauli_sum_to_matrix(&heisenberg(sites, g, hfield)?)?;
    check_scales(alpha, beta, spectral_norm(&h))?;
    let psi0 = initial_state(&bits, sites)?;

    let points = times
        .par_iter()
        .map(|&t| simulate_point(&h, &psi0, t, alpha, beta, &deg, &synth))
        .collect::<CliResult<Vec<_>>>()?;
    let mut csv = String::from("t,sigma_z_exact,sigma_z_roaa,sigma_z_os,err_roaa,err_os,p_roaa,p_os\n");
    for (&t, p) in times.iter().zip(&points) {
        let ze = expectation_sigma_z(&evolve_exact(&h, &psi0, t)?, site)?;
        let zr = expectation_sigma_z(&p.roaa, site)?;
        let zo = expectation_sigma_z(&p.os, site)?;
        csv.push_str(&csv_row(&[t, ze, zr, zo, (zr - ze).abs(), (zo - ze).abs(), p.p_roaa, p.p_os]));
    }
    let p_roaa: Vec<f64> = points.iter().map(|p| p.p_roaa).collect();
    let p_os: Vec<f64> = points.iter().map(|p| p.p_os).collect();
    let summary = json!({
        "experiment": "heisenberg_ti",
        "queries": { "roaa": 3 * (deg.cos + deg.sin), "os": deg.eece },
        "mean_success": { "roaa": mean(&p_roaa), "os": mean(&p_os) },
        "points": point_diagnostics(&points),
    });
    Ok(Report { name: "heisenberg-ti", echo, csv: Some(csv), summary })
}

/// Heisenberg chain in a field `h0 + h_slope t`, Trotterized with the same phases every step.
pub fn run_heisenberg_td(config: &Config, no_cache: bool) -> CliResult<Report> {
    let r = Reader::new(config);
    let (sites, g) = read_chain(&r)?;
    let h0 = r.f64("model.h0", 0.0)?;
    let slope = r.f64("model.h_slope", 1.0 / 15.0)?;
    let alpha = r.f64("model.alpha", 2.5)?;
    let beta = r.f64("model.beta", 0.25)?;
    let deg = read_degrees(&r, 2, 3, 14)?;
    let dt = r.f64("trotter.dt", 0.5)?;
    let steps = r.usize("trotter.steps", 24)?;
    let substeps = r.usize("exact.substeps", 2000)?;
    let bits = r.string("state.initial", &"0".repeat(sites))?;
    let site = r.usize("observable.site", 0)?;
    let synth = Synthesis::read(&r, no_cache, 1e-3)?;
    let echo = r.finish()?;
    if !(dt > 0.0) || steps == 0 {
        return Err(CliError::Config("trotter.dt must be positive and trotter.steps at least 1".into()));
    }
    if site >= sites {
        return Err(CliError::Config(format!("observable.site {site} out of range")));
    }
    let spec = TimeDependentSpec::new(
        move |t| heisenberg_hamiltonian(sites, &vec![g; sites - 1], &vec![h0 + slope * t; sites]),
        dt * steps as f64,
        steps,
    )?;
    let mut norm: f64 = 0.0;
    for k in 0..steps {
        norm = norm.max(spectral_norm(&spec.matrix_at(k as f64 * dt)?));
    }
    check_scales(alpha, beta, norm)?;
    let psi0 = initial_state(&bits, sites)?;

    let tau = alpha * dt;
    let (pc, ps) = synth.lcu_pair(tau, deg.cos, deg.sin)?;
    let lcu_epsilon = lcu_phase_error(&pc, &ps, tau)?;
    let tau_os = 2.0 * dt * alpha / beta;
    let e = synth.exponential(tau_os, beta, deg.eece)?;
    let eece_epsilon = eece_phase_error(&e.phases, tau_os, beta)?;
    let roaa_cfg = StepConfig {
        alpha,
        epsilon: declared(lcu_epsilon),
        algorithm: StepAlgorithm::Roaa { phases_cos: pc, phases_sin: ps },
    };
    let os_cfg = StepConfig {
        alpha,
        epsilon: declared(eece_epsilon),
        algorithm: StepAlgorithm::OneShot { beta, phases_eece: e.phases.clone() },
    };
    let roaa = trotter_evolve(&spec, &psi0, &roaa_cfg)?;
    let os = trotter_evolve(&spec, &psi0, &os_cfg)?;
    let ideal = ideal_trotter_states(&spec, &psi0)?;

    let z0 = expectation_sigma_z(&psi0, site)?;
    let mut csv = String::from(
        "t,sigma_z_exact,sigma_z_trotter_ideal,sigma_z_roaa,sigma_z_os,err_trotter_ideal,err_roaa,err_os,p_roaa,p_os\n",
    );
    csv.push_str(&csv_row(&[0.0, z0, z0, z0, z0, 0.0, 0.0, 0.0, 1.0, 1.0]));
    let (mut ts, mut ei, mut er, mut eo) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (k, ideal_k) in ideal.iter().enumerate() {
        let t = (k + 1) as f64 * dt;
        let u = exact_evolution_td(&spec, t, substeps)?;
        let ze = expectation_sigma_z(&Statevector::new(u * &psi0.amplitudes)?, site)?;
        let zi = expectation_sigma_z(ideal_k, site)?;
        let zr = expectation_sigma_z(&roaa.steps[k].final_state, site)?;
        let zo = expectation_sigma_z(&os.steps[k].final_state, site)?;
        let row = [
            t,
            ze,
            zi,
            zr,
            zo,
            (zi - ze).abs(),
            (zr - ze).abs(),
            (zo - ze).abs(),
            roaa.cumulative_success[k],
            os.cumulative_success[k],
        ];
        csv.push_str(&csv_row(&row));
        ts.push(t);
        ei.push(row[5]);
        er.push(row[6]);
        eo.push(row[7]);
    }
    let end = dt * steps as f64;
    let (fi, fr, fo) = (LinearFit::new(&ts, &ei), LinearFit::new(&ts, &er), LinearFit::new(&ts, &eo));
    let per_step = |run: &qspsim_core::algorithms::TrotterRun| {
        mean(&run.steps.iter().map(|s| s.success_probability).collect::<Vec<_>>())
    };
    let summary = json!({
        "experiment": "heisenberg_td",
        "queries_per_step": { "roaa": 3 * (deg.cos + deg.sin), "os": deg.eece },
        "lcu_epsilon": lcu_epsilon,
        "eece_epsilon": eece_epsilon,
        "eece_converged": e.converged,
        "fits": { "trotter_ideal": fi.json(), "roaa": fr.json(), "os": fo.json() },
        "end_time": end,
        "excess_end_error": { "roaa": fr.at(end) - fi.at(end), "os": fo.at(end) - fi.at(end) },
        "mean_cumulative_success": { "roaa": mean(&roaa.cumulative_success), "os": mean(&os.cumulative_success) },
        "mean_step_success": { "roaa": per_step(&roaa), "os": per_step(&os) },
    });
    Ok(Report { name: "heisenberg-td", echo, csv: Some(csv), summary })
}

fn parse_orbitals(s: &str) -> CliResult<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(CliError::Config(format!("observable.orbitals: bad indices {s:?}"))),
        },
        _ => Err(CliError::Config(format!("observable.orbitals needs two indices, got {s:?}"))),
    }
}

/// A time and the value there.
type Extremum = (f64, f64);

/// `<n>(t)` of the exact evolution from its eigendecomposition.
struct ExactOccupation {
    vals: Vec<f64>,
    vecs: ComplexMatrix,
    coeffs: nalgebra::DVector<C64>,
    orbitals: (usize, usize),
}

impl ExactOccupation {
    fn new(h: &ComplexMatrix, psi0: &Statevector, orbitals: (usize, usize)) -> CliResult<Self> {
        let (vals, vecs) = hermitian_eig(h)?;
        let coeffs = vecs.adjoint() * &psi0.amplitudes;
        Ok(Self { vals, vecs, coeffs, orbitals })
    }

    fn at(&self, t: f64) -> CliResult<f64> {
        let phased = nalgebra::DVector::from_iterator(
            self.vals.len(),
            self.vals.iter().zip(self.coeffs.iter()).map(|(l, c)| c * C64::from_polar(1.0, -l * t)),
        );
        Ok(occupation_number(&Statevector::new(&self.vecs * phased)?, self.orbitals)?)
    }

    /// First local maximum and the first local minimum after it, scanning in steps of `dt`
    /// and refining each extremum with a parabola through the neighbouring samples.
    fn first_peak_and_return(&self, dt: f64, horizon: f64) -> CliResult<Option<(Extremum, Extremum)>> {
        let n = (horizon / dt).ceil() as usize;
        let ys = (0..=n).map(|i| self.at(i as f64 * dt)).collect::<CliResult<Vec<_>>>()?;
        let refine = |i: usize| {
            let (a, b, c) = (ys[i - 1], ys[i], ys[i + 1]);
            let den = a - 2.0 * b + c;
            let off = if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 };
            ((i as f64 + off) * dt, b - 0.25 * (a - c) * off)
        };
        let mut peak = None;
        for i in 1..n {
            if peak.is_none() && ys[i] >= ys[i - 1] && ys[i] > ys[i + 1] {
                peak = Some(refine(i));
            } else if let Some(p) = peak {
                if ys[i] <= ys[i - 1] && ys[i] < ys[i + 1] {
                    return Ok(Some((p, refine(i))));
                }
            }
        }
        Ok(None)
    }
}

/// Charge oscillation in H2: ROAA and one-shot `<n_A>` against exact evolution, times in fs.
pub fn run_h2(config: &Config, no_cache: bool) -> CliResult<Report> {
    let r = Reader::new(config);
    let file = r.string("model.pauli_file", "")?;
    let alpha = r.f64("model.alpha", 1.4)?;
    let beta = r.f64("model.beta", 0.5)?;
    let shift_mode = r.string("model.shift", "midpoint")?;
    let deg = read_degrees(&r, 6, 5, 32)?;
    let times_fs = linspace(r.f64("time.start_fs", 0.0)?, r.f64("time.stop_fs", 0.15)?, r.usize("time.points", 31)?);
    let bits = r.string("state.initial", "0101")?;
    let orbitals = parse_orbitals(&r.string("observable.orbitals", "0,2")?)?;
    let synth = Synthesis::read(&r, no_cache, 1e-2)?;
    let echo = r.finish()?;
    let pauli = if file.is_empty() {
        parse_pauli_sum(H2_PAULI)?
    } else {
        let path = PathBuf::from(&file);
        if !path.is_file() {
            return Err(CliError::Config(format!("model.pauli_file {file} does not exist")));
        }
        load_pauli_sum(&path)?
    };
    if times_fs.iter().any(|t| *t < 0.0) {
        return Err(CliError::Config("times must be non-negative".into()));
    }
    let q = pauli.qubit_count();
    let h = pauli_sum_to_matrix(&pauli)?;
    let (vals, _) = hermitian_eig(&h)?;
    // A multiple of the identity only changes the global phase of the evolution.
    let shift = match shift_mode.as_str() {
        "midpoint" => 0.5 * (vals[0] + vals[vals.len() - 1]),
        "none" => 0.0,
        other => other.parse::<f64>().map_err(|_| {
            CliError::Config(format!("model.shift: expected midpoint, none or a number, got {other:?}"))
        })?,
    };
    let hs = &h - identity(h.nrows()).scale(shift);
    check_scales(alpha, beta, spectral_norm(&hs))?;
    let psi0 = initial_state(&bits, q)?;
    if orbitals.0 >= q || orbitals.1 >= q {
        return Err(CliError::Config(format!("observable.orbitals out of range for {q} qubits")));
    }

    let points = times_fs
        .par_iter()
        .map(|&tf| simulate_point(&hs, &psi0, tf / FS_PER_AU, alpha, beta, &deg, &synth))
        .collect::<CliResult<Vec<_>>>()?;
    let exact = ExactOccupation::new(&h, &psi0, orbitals)?;
    let mut csv =
        String::from("t_fs,nA_exact,nA_roaa,nA_os,err_roaa,err_os,p_roaa,p_os,low_confidence_roaa,low_confidence_os\n");
    let (mut conf_err_roaa, mut conf_err_os) = (Vec::new(), Vec::new());
    for (&tf, p) in times_fs.iter().zip(&points) {
        let ne = exact.at(tf / FS_PER_AU)?;
        let nr = occupation_number(&p.roaa, orbitals)?;
        let no = occupation_number(&p.os, orbitals)?;
        let (lr, lo) = (p.p_roaa < LOW_CONFIDENCE, p.p_os < LOW_CONFIDENCE);
        if !lr {
            conf_err_roaa.push((nr - ne).abs());
        }
        if !lo {
            conf_err_os.push((no - ne).abs());
        }
        let mut row = csv_row(&[tf, ne, nr, no, (nr - ne).abs(), (no - ne).abs(), p.p_roaa, p.p_os]);
        row.pop();
        row.push_str(&format!(",{},{}\n", u8::from(lr), u8::from(lo)));
        csv.push_str(&row);
    }
    let horizon = times_fs.last().copied().unwrap_or(0.0).max(0.3) / FS_PER_AU;
    let extrema = exact.first_peak_and_return(1e-4 / FS_PER_AU, horizon)?;
    let (peak, period) = match extrema {
        Some(((tp, vp), (tm, _))) => (json!({ "t_fs": tp * FS_PER_AU, "nA": vp }), json!(tm * FS_PER_AU)),
        None => (Value::Null, Value::Null),
    };
    let summary = json!({
        "experiment": "h2",
        "energy_shift": shift,
        "queries": { "roaa": 3 * (deg.cos + deg.sin), "os": deg.eece },
        "exact_first_peak": peak,
        "exact_period_fs": period,
        "low_confidence_threshold": LOW_CONFIDENCE,
        "mean_error_confident": { "roaa": mean(&conf_err_roaa), "os": mean(&conf_err_os) },
        "confident_points": { "roaa": conf_err_roaa.len(), "os": conf_err_os.len() },
        "points": point_diagnostics(&points),
    });
    Ok(Report { name: "h2", echo, csv: Some(csv), summary })
}

fn sweep_checks(rows: &[ComplexityReport], vary_t: bool) -> Value {
    let key = |r: &ComplexityReport| if vary_t { r.t } else { r.epsilon };
    let series =
        |a: Algorithm| rows.iter().filter(|r| r.algorithm == a).map(|r| (key(r), r.queries)).collect::<Vec<_>>();
    let (aa, lcu, roaa, os) =
        (series(Algorithm::Aa), series(Algorithm::Lcu), series(Algorithm::Roaa), series(Algorithm::OneShot));
    let aa_dominates = aa.iter().zip(&roaa).zip(&os).all(|((a, r), o)| a.1 > r.1 && a.1 > o.1);
    let sign = |i: usize| (os[i].1 as i64 - roaa[i].1 as i64).signum();
    let crossing = (1..os.len()).any(|i| sign(i) != sign(i - 1));
    json!({ "aa_dominates": aa_dominates, "os_roaa_crossing": crossing, "points": lcu.len() })
}

/// Query counts of the four algorithms over a time sweep and an accuracy sweep.
pub fn run_complexity_sweep(config: &Config) -> CliResult<Report> {
    let r = Reader::new(config);
    let alpha = r.f64("model.alpha", 5.0)?;
    let beta = r.f64("model.beta", 0.5)?;
    let t_values = r.f64_list("sweep.t_values", &linspace(1.0, 10.0, 10))?;
    let t_epsilon = r.f64("sweep.t_epsilon", 0.02)?;
    let eps_values = r.f64_list("sweep.epsilon_values", &logspace(1e-4, 1e-1, 13))?;
    let eps_time = r.f64("sweep.epsilon_time", 5.0)?;
    let echo = r.finish()?;
    let time_rows = complexity_table(&t_values, &[t_epsilon], alpha, beta)?;
    let eps_rows = complexity_table(&[eps_time], &eps_values, alpha, beta)?;
    let mut csv = String::from("sweep,");
    let table = |rows: &[ComplexityReport]| qspsim_core::complexity::to_csv(rows);
    let t_csv = table(&time_rows);
    let mut lines = t_csv.lines();
    csv.push_str(lines.next().unwrap_or(""));
    csv.push('\n');
    for l in lines {
        csv.push_str(&format!("time,{l}\n"));
    }
    for l in table(&eps_rows).lines().skip(1) {
        csv.push_str(&format!("epsilon,{l}\n"));
    }
    let summary = json!({
        "experiment": "complexity_sweep",
        "time_sweep": sweep_checks(&time_rows, true),
        "epsilon_sweep": sweep_checks(&eps_rows, false),
    });
    Ok(Report { name: "complexity", echo, csv: Some(csv), summary })
}

/// `headroom` is the factor the constructor divided by to keep `|P| < 1`; the reported error
/// is that of the series itself, with the admissible polynomial's error alongside.
fn report_json(
    target: &Target,
    p: &ChebyshevPolynomial,
    headroom: f64,
    intervals: &[Interval],
    eps: f64,
) -> CliResult<Value> {
    let rep = measure_error(&p.scaled(headroom), target, intervals, GRID_POINTS, eps)?;
    let admissible = measure_error(p, target, intervals, GRID_POINTS, eps)?;
    Ok(json!({
        "target": rep.target_name,
        "epsilon_requested": rep.epsilon_requested,
        "epsilon_measured": rep.epsilon_measured,
        "epsilon_admissible": admissible.epsilon_measured,
        "degree": rep.degree,
        "intervals": intervals.iter().map(|iv| [iv.lo, iv.hi]).collect::<Vec<_>>(),
    }))
}

/// Error reports for the polynomial constructors at one parameter set.
pub fn run_approx_report(config: &Config) -> CliResult<Report> {
    let r = Reader::new(config);
    let targets = r.string("approx.targets", "cos,sin,sign,eece")?;
    let tau = r.f64("approx.tau", 5.25)?;
    let eps = r.f64("approx.epsilon", 1e-3)?;
    let delta = r.f64("approx.delta", 0.6)?;
    let echo = r.finish()?;
    let full = [Interval::FULL];
    let mut reports = Vec::new();
    for name in targets.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let rep = match name {
            "cos" => report_json(&Target::Cos { tau }, &jacobi_anger_cos(tau, eps)?, 1.0 + eps, &full, eps)?,
            "sin" => report_json(&Target::Sin { tau }, &jacobi_anger_sin(tau, eps)?, 1.0 + eps, &full, eps)?,
            "sign" => {
                report_json(&Target::Sign, &sign_poly(eps, delta)?, 1.0, &Interval::outside_gap(delta / 2.0), eps)?
            }
            "eece" => report_json(
                &Target::Eece { tau },
                &eece_poly(eps, delta, tau)?,
                1.0,
                &Interval::outside_gap(delta / 2.0),
                eps,
            )?,
            other => return Err(CliError::Config(format!("approx.targets: unknown target {other:?}"))),
        };
        reports.push(rep);
    }
    let summary = json!({ "experiment": "approx_report", "reports": reports });
    Ok(Report { name: "approx", echo, csv: None, summary })
}

/// Phases for one target, with the effective configuration.
#[derive(Debug, Clone)]
pub struct PhasesOutput {
    pub echo: Vec<(String, String)>,
    /// `PhaseVector` text in the requested convention.
    pub text: String,
    pub result: SynthesisResult,
}

/// Synthesized phases for a single target.
pub fn run_phases(config: &Config, no_cache: bool) -> CliResult<PhasesOutput> {
    let r = Reader::new(config);
    let target = r.string("phases.target", "cos")?;
    let tau = r.f64("phases.tau", 1.0)?;
    let eps = r.f64("phases.epsilon", 1e-3)?;
    let delta = r.f64("phases.delta", 0.6)?;
    let beta = r.f64("phases.beta", 0.4)?;
    let degree = r.usize("phases.degree", 0)?;
    let convention: qspsim_core::Convention = r
        .string("phases.convention", "wx")?
        .parse()
        .map_err(|e: qspsim_core::QspError| CliError::Config(e.to_string()))?;
    let synth = Synthesis::read(&r, no_cache, 1e-2)?;
    let echo = r.finish()?;
    let result = match target.as_str() {
        "exp" => {
            if degree == 0 || degree % 2 != 0 {
                return Err(CliError::Config("phases.degree must be even and positive for exp".into()));
            }
            if !(beta > 0.0 && beta < 1.0) {
                return Err(CliError::Config(format!("phases.beta must lie in (0, 1), got {beta}")));
            }
            let r = synth.exponential(tau, beta, degree)?;
            if !r.converged {
                return Err(CliError::Synthesis(format!(
                    "error {:.3e} above tolerance {:.3e}",
                    r.achieved_error, synth.tolerance
                )));
            }
            r
        }
        name => {
            let (label, poly, basis) = match name {
                "cos" if degree > 0 => ("jacobi_anger_cos", jacobi_anger_cos_degree(tau, degree)?, Basis::Hadamard),
                "cos" => ("jacobi_anger_cos", jacobi_anger_cos(tau, eps)?, Basis::Hadamard),
                "sin" if degree > 0 => ("jacobi_anger_sin", jacobi_anger_sin_degree(tau, degree)?, Basis::Hadamard),
                "sin" => ("jacobi_anger_sin", jacobi_anger_sin(tau, eps)?, Basis::Hadamard),
                "sign" => ("sign", sign_poly(eps, delta)?, Basis::Hadamard),
                "eece" => ("eece", eece_poly(eps, delta, tau)?, Basis::Computational),
                other => return Err(CliError::Config(format!("phases.target: unknown target {other:?}"))),
            };
            let label = format!("{label} tau={tau:e} epsilon={eps:e} delta={delta:e} degree={}", poly.degree());
            let r = synth.polynomial(&label, &poly, basis)?;
            if !r.converged {
                return Err(CliError::Synthesis(format!(
                    "error {:.3e} above tolerance {:.3e}",
                    r.achieved_error, synth.poly_tolerance
                )));
            }
            r
        }
    };
    let text = match convention {
        qspsim_core::Convention::WxSignal => result.phases.to_wx().to_text(),
        qspsim_core::Convention::Reflection => result.phases.to_reflection().to_text(),
    };
    Ok(PhasesOutput { echo, text, result })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        Config::parse(text).unwrap()
    }

    #[test]
    fn linear_fit_exact_line() {
        let f = LinearFit::new(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15);
        assert_eq!(f.r_squared, 1.0);
        assert_eq!(f.at(3.0), 7.0);
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 3.5, 36).len(), 36);
        assert_eq!(linspace(0.0, 3.5, 36)[35], 3.5);
        let l = logspace(1e-4, 1e-1, 4);
        assert!((l[1] - 1e-3).abs() < 1e-15 && (l[3] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(matches!(run_heisenberg_ti(&cfg("poly.d_cos = 5\n"), true), Err(CliError::Config(_))));
        assert!(matches!(run_heisenberg_ti(&cfg("model.alpha = 1.0\n"), true), Err(CliError::Config(_))));
        assert!(matches!(run_heisenberg_ti(&cfg("model.beta = 1.0\n"), true), Err(CliError::Config(_))));
        assert!(matches!(run_heisenberg_ti(&cfg("model.typo = 1\n"), true), Err(CliError::Config(_))));
        assert!(matches!(run_h2(&cfg("model.pauli_file = /nonexistent.pauli\n"), true), Err(CliError::Config(_))));
        assert!(matches!(run_h2(&cfg("model.alpha = 1.0\n"), true), Err(CliError::Config(_))));
        assert!(matches!(run_heisenberg_td(&cfg("trotter.steps = 0\n"), true), Err(CliError::Config(_))));
        assert!(matches!(run_approx_report(&cfg("approx.targets = tan\n")), Err(CliError::Config(_))));
    }

    #[test]
    fn ti_small_grid() {
        let rep = run_heisenberg_ti(&cfg("time.stop = 1.0\ntime.points = 3\n"), true).unwrap();
        let csv = rep.csv.unwrap();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], "t,sigma_z_exact,sigma_z_roaa,sigma_z_os,err_roaa,err_os,p_roaa,p_os");
        assert!(rows[1].starts_with("0,1,1,"));
        let last: Vec<f64> = rows[3].split(',').map(|v| v.parse().unwrap()).collect();
        let want = 1.0 - (2f64.sqrt()).sin().powi(2);
        assert!((last[1] - want).abs() < 1e-11);
        assert!(last[4] < 1e-3 && last[5] < 1e-2);
        assert_eq!(rep.summary["queries"]["roaa"], 33);
        assert_eq!(rep.summary["queries"]["os"], 32);
    }

    #[test]
    fn td_constant_field_has_no_trotter_error() {
        let rep = run_heisenberg_td(&cfg("model.h0 = 0.3\nmodel.h_slope = 0\ntrotter.steps = 4\n"), true).unwrap();
        for line in rep.csv.unwrap().lines().skip(1) {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert!(v[5] <= 1e-8, "{line}");
        }
    }

    #[test]
    fn complexity_csv_shape() {
        let rep = run_complexity_sweep(&Config::default()).unwrap();
        let csv = rep.csv.unwrap();
        assert!(csv.starts_with("sweep,algorithm,t,alpha,beta,epsilon,delta,queries\n"));
        assert_eq!(csv.lines().count(), 1 + 4 * 10 + 4 * 13);
        assert_eq!(rep.summary["time_sweep"]["aa_dominates"], true);
    }

    #[test]
    fn approx_examples() {
        let rep = run_approx_report(&cfg("approx.targets = cos\napprox.tau = 0\n")).unwrap();
        assert_eq!(rep.summary["reports"][0]["epsilon_measured"], 0.0);
        let rep =
            run_approx_report(&cfg("approx.targets = sign\napprox.epsilon = 0.01\napprox.delta = 0.5\n")).unwrap();
        assert!(rep.summary["reports"][0]["epsilon_measured"].as_f64().unwrap() <= 0.01);
    }

    #[test]
    fn phases_round_trip() {
        let out = run_phases(&cfg("phases.target = cos\nphases.tau = 1.5\nphases.degree = 6\n"), true).unwrap();
        assert!(out.result.converged);
        let p = PhaseVector::from_text(&out.text).unwrap();
        assert_eq!(p.degree(), 6);
        assert!(out.text.starts_with("qsp-phases d=6 convention=wx\n"));
    }
}
