// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Quantum signal processing: sequence evaluation, phase synthesis, and the QET / QSVT
//! lifts of a phase vector to a block encoding.
//!
//! Phases are stored in the Wx convention `e^{i phi_0 Z} prod_k W(x) e^{i phi_k Z}` unless
//! tagged otherwise. The reflection convention replaces `W(x)` by
//! `R(x) = [[x, s], [s, -x]]`, which is the form a dilation block encoding takes inside each
//! invariant subspace. The two are related by `W = i e^{-i pi/4 Z} R e^{-i pi/4 Z}`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoding::{extract_block, hadamard_top, BlockEncoding};
use crate::error::{domain, QspError, Result};
use crate::numerics::chebyshev::chebyshev_nodes;
use crate::numerics::{chebyshev_from_samples, is_hermitian, ComplexMatrix, C64};
use crate::polyapprox::{ChebyshevPolynomial, Interval, Parity};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Uniform points added to the Chebyshev nodes of every synthesis objective.
pub const VALIDATION_POINTS: usize = 201;
/// Perturbed restarts tried after the symmetric initial guess.
pub const MAX_RESTARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convention {
    WxSignal,
    Reflection,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::WxSignal => "wx",
            Convention::Reflection => "reflection",
        })
    }
}

impl FromStr for Convention {
    type Err = QspError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wx" => Ok(Convention::WxSignal),
            "reflection" => Ok(Convention::Reflection),
            _ => domain(format!("unknown phase convention {s:?}")),
        }
    }
}

/// Where the encoded polynomial is read: `<0|U|0>` or `<+|U|+>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Computational,
    Hadamard,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Computational => "computational",
            Basis::Hadamard => "hadamard",
        })
    }
}

impl FromStr for Basis {
    type Err = QspError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "computational" => Ok(Basis::Computational),
            "hadamard" => Ok(Basis::Hadamard),
            _ => domain(format!("unknown basis {s:?}")),
        }
    }
}

fn canonical(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Phases `(phi_0, ..., phi_d)`, each reduced into `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    phases: Vec<f64>,
    convention: Convention,
}

impl PhaseVector {
    pub fn new(phases: Vec<f64>, convention: Convention) -> Result<Self> {
        if phases.is_empty() {
            return domain("a phase vector needs at least one phase");
        }
        if let Some(p) = phases.iter().find(|p| !p.is_finite()) {
            return domain(format!("phase {p} is not finite"));
        }
        Ok(Self { phases: phases.into_iter().map(canonical).collect(), convention })
    }

    pub fn wx(phases: Vec<f64>) -> Result<Self> {
        Self::new(phases, Convention::WxSignal)
    }

    pub fn degree(&self) -> usize {
        self.phases.len() - 1
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Shifts the phases so that the reflection sequence equals the Wx sequence up to the
    /// global factor `i^d`.
    pub fn to_reflection(&self) -> PhaseVector {
        self.shifted(Convention::Reflection, -1.0)
    }

    pub fn to_wx(&self) -> PhaseVector {
        self.shifted(Convention::WxSignal, 1.0)
    }

    fn shifted(&self, target: Convention, sign: f64) -> PhaseVector {
        if self.convention == target {
            return self.clone();
        }
        let d = self.degree();
        let phases = self
            .phases
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let shift = if d == 0 {
                    0.0
                } else if k == 0 || k == d {
                    FRAC_PI_4
                } else {
                    FRAC_PI_2
                };
                canonical(p + sign * shift)
            })
            .collect();
        PhaseVector { phases, convention: target }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("qsp-phases d={} convention={}\n", self.degree(), self.convention);
        for p in &self.phases {
            out.push_str(&format!("{p:.16e}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(QspError::Parse { line: 1, msg: "empty phase file".into() })?;
        let mut degree = None;
        let mut convention = None;
        let mut words = header.split_whitespace();
        if words.next() != Some("qsp-phases") {
            return Err(QspError::Parse { line: 1, msg: format!("bad header {header:?}") });
        }
        for w in words {
            if let Some(v) = w.strip_prefix("d=") {
                degree = v.parse::<usize>().ok();
            } else if let Some(v) = w.strip_prefix("convention=") {
                convention = v.parse::<Convention>().ok();
            }
        }
        let (Some(degree), Some(convention)) = (degree, convention) else {
            return Err(QspError::Parse { line: 1, msg: format!("bad header {header:?}") });
        };
        let mut phases = Vec::with_capacity(degree + 1);
        for (idx, l) in lines {
            let v: f64 = l
                .trim()
                .parse()
                .map_err(|_| QspError::Parse { line: idx + 1, msg: format!("bad phase {:?}", l.trim()) })?;
            phases.push(v);
        }
        if phases.len() != degree + 1 {
            return Err(QspError::Parse {
                line: 1,
                msg: format!("header declares degree {degree} but {} phases follow", phases.len()),
            });
        }
        PhaseVector::new(phases, convention)
    }
}

type M2 = [[C64; 2]; 2];

fn m2mul(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn m2_to_matrix(m: &M2) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
}

fn check_x(x: f64) -> Result<()> {
    if !(x.abs() <= 1.0) {
        return domain(format!("signal value must satisfy |x| <= 1, got {x}"));
    }
    Ok(())
}

fn sqrt_1mx2(x: f64) -> f64 {
    ((1.0 - x) * (1.0 + x)).max(0.0).sqrt()
}

fn w_m2(x: f64) -> M2 {
    let s = C64::new(0.0, sqrt_1mx2(x));
    let x = C64::new(x, 0.0);
    [[x, s], [s, x]]
}

fn r_m2(x: f64) -> M2 {
    let s = C64::new(sqrt_1mx2(x), 0.0);
    let x = C64::new(x, 0.0);
    [[x, s], [s, -x]]
}

fn z_phase(phi: f64) -> (C64, C64) {
    let e = C64::from_polar(1.0, phi);
    (e, e.conj())
}

/// `W(x) = [[x, i sqrt(1-x^2)], [i sqrt(1-x^2), x]]`.
pub fn signal_operator(x: f64) -> Result<ComplexMatrix> {
    check_x(x)?;
    Ok(m2_to_matrix(&w_m2(x)))
}

fn sequence_m2(phases: &PhaseVector, x: f64) -> M2 {
    let sig = match phases.convention {
        Convention::WxSignal => w_m2(x),
        Convention::Reflection => r_m2(x),
    };
    let (e, ec) = z_phase(phases.phases[0]);
    let mut u: M2 = [[e, ZERO], [ZERO, ec]];
    for &p in &phases.phases[1..] {
        u = m2mul(&u, &sig);
        let (e, ec) = z_phase(p);
        for row in u.iter_mut() {
            row[0] *= e;
            row[1] *= ec;
        }
    }
    u
}

/// The 2x2 sequence unitary in the phase vector's own convention.
pub fn qsp_unitary(phases: &PhaseVector, x: f64) -> Result<ComplexMatrix> {
    check_x(x)?;
    Ok(m2_to_matrix(&sequence_m2(phases, x)))
}

/// `<0|U|0>` or `<+|U|+>` of the Wx sequence. Reflection-tagged vectors are converted first,
/// so the value does not depend on the stored convention.
pub fn block_value(phases: &PhaseVector, x: f64, basis: Basis) -> Result<C64> {
    check_x(x)?;
    let wx = phases.to_wx();
    Ok(read(&sequence_m2(&wx, x), basis))
}

fn read(u: &M2, basis: Basis) -> C64 {
    match basis {
        Basis::Computational => u[0][0],
        Basis::Hadamard => (u[0][0] + u[0][1] + u[1][0] + u[1][1]) * 0.5,
    }
}

/// The value a QET lift applies at eigenvalue `x`: `P(x)` in the computational basis and
/// `Re P(x) = Re <+|U|+>` in the hadamard basis. Synthesis fits this quantity.
pub fn realized_value(phases: &PhaseVector, x: f64, basis: Basis) -> Result<C64> {
    check_x(x)?;
    let p = sequence_m2(&phases.to_wx(), x)[0][0];
    Ok(realize(p, basis))
}

fn realize(p: C64, basis: Basis) -> C64 {
    match basis {
        Basis::Computational => p,
        Basis::Hadamard => C64::new(p.re, 0.0),
    }
}

/// Outcome of a phase synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub phases: PhaseVector,
    /// Sup-norm of `realized_value - target` over the synthesis grid.
    pub achieved_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOptions {
    pub tolerance: f64,
    pub seed: u64,
    pub max_restarts: usize,
    /// Starting point for the first attempt in place of `(pi/4, 0, ..., 0, pi/4)`.
    pub initial: Option<Vec<f64>>,
}

impl SynthesisOptions {
    pub fn new(tolerance: f64) -> Self {
        Self { tolerance, seed: 0, max_restarts: MAX_RESTARTS, initial: None }
    }

    pub fn with_initial(mut self, phases: &PhaseVector) -> Self {
        self.initial = Some(phases.to_wx().phases().to_vec());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Fitting nodes and validation points for a degree-`d` synthesis over `domain_intervals`.
///
/// The `d + 1` fitting nodes are Chebyshev nodes mapped into each interval (shared out as
/// evenly as possible); the validation set is `VALIDATION_POINTS` uniform points plus the nodes.
pub fn synthesis_grid(degree: usize, domain_intervals: &[Interval]) -> (Vec<f64>, Vec<f64>) {
    let k = domain_intervals.len();
    let share = |total: usize, i: usize| total / k + usize::from(i < total % k);
    let mut nodes = Vec::new();
    let mut check = Vec::new();
    for (i, iv) in domain_intervals.iter().enumerate() {
        let (mid, half) = (0.5 * (iv.lo + iv.hi), 0.5 * (iv.hi - iv.lo));
        nodes.extend(chebyshev_nodes(share(degree + 1, i).max(1)).into_iter().map(|t| mid + half * t));
        check.extend(iv.grid(share(VALIDATION_POINTS, i)));
    }
    check.extend_from_slice(&nodes);
    (nodes, check)
}

struct Problem {
    xs: Vec<f64>,
    fs: Vec<C64>,
    sig: Vec<M2>,
    basis: Basis,
    degree: usize,
}

impl Problem {
    fn new(xs: Vec<f64>, target: &dyn Fn(f64) -> C64, basis: Basis, degree: usize) -> Self {
        let fs = xs.iter().map(|&x| target(x)).collect();
        let sig = xs.iter().map(|&x| w_m2(x)).collect();
        Self { xs, fs, sig, basis, degree }
    }

    fn rows(&self) -> usize {
        match self.basis {
            Basis::Computational => 2,
            Basis::Hadamard => 1,
        }
    }

    fn value(&self, phi: &[f64], j: usize) -> C64 {
        let p = PhaseVector { phases: phi.to_vec(), convention: Convention::WxSignal };
        realize(sequence_m2(&p, self.xs[j])[0][0], self.basis)
    }

    fn max_error(&self, phi: &[f64]) -> f64 {
        (0..self.xs.len()).map(|j| (self.value(phi, j) - self.fs[j]).norm()).fold(0.0, f64::max)
    }

    /// Residuals (`re, im` per point, or `re` alone for the hadamard basis) and their
    /// Jacobian with respect to the phases.
    fn residuals(&self, phi: &[f64], jac: Option<&mut DMatrix<f64>>) -> DVector<f64> {
        let m = self.xs.len();
        let n = self.degree + 1;
        let rows = self.rows();
        let (bl, br) = ([ONE, ZERO], [ONE, ZERO]);
        let mut r = DVector::zeros(rows * m);
        let ez: Vec<(C64, C64)> = phi.iter().map(|&p| z_phase(p)).collect();
        let mut jac = jac;
        let mut us = vec![[ZERO; 2]; n];
        let mut vs = vec![[ZERO; 2]; n];
        for j in 0..m {
            let w = &self.sig[j];
            // us[k] = b^T A_0 W ... A_{k-1} W (row vector); vs[k] = W A_{k+1} ... A_d b.
            let mut u = bl;
            for k in 0..n {
                us[k] = u;
                if k + 1 < n {
                    let a = [u[0] * ez[k].0, u[1] * ez[k].1];
                    u = [a[0] * w[0][0] + a[1] * w[1][0], a[0] * w[0][1] + a[1] * w[1][1]];
                }
            }
            let mut v = br;
            for k in (0..n).rev() {
                vs[k] = v;
                if k > 0 {
                    let a = [ez[k].0 * v[0], ez[k].1 * v[1]];
                    v = [w[0][0] * a[0] + w[0][1] * a[1], w[1][0] * a[0] + w[1][1] * a[1]];
                }
            }
            let g = us[0][0] * ez[0].0 * vs[0][0] + us[0][1] * ez[0].1 * vs[0][1];
            let res = g - self.fs[j];
            r[rows * j] = res.re;
            if rows == 2 {
                r[2 * j + 1] = res.im;
            }
            if let Some(jm) = jac.as_deref_mut() {
                for k in 0..n {
                    let dg = I * (us[k][0] * ez[k].0 * vs[k][0] - us[k][1] * ez[k].1 * vs[k][1]);
                    jm[(rows * j, k)] = dg.re;
                    if rows == 2 {
                        jm[(2 * j + 1, k)] = dg.im;
                    }
                }
            }
        }
        r
    }

    /// Levenberg-Marquardt from `init`; returns the final phases and iteration count.
    ///
    /// The damping term is `lambda * max_k (J^T J)_kk * I`: the objective has many nearly flat
    /// directions when the domain is a sub-interval, and per-coordinate scaling lets those
    /// directions take oversized steps.
    fn solve(&self, init: Vec<f64>, cap: usize, check: &Problem, good_enough: f64) -> (Vec<f64>, usize) {
        let n = self.degree + 1;
        let mut phi = init;
        let mut jac = DMatrix::zeros(self.rows() * self.xs.len(), n);
        let mut r = self.residuals(&phi, Some(&mut jac));
        let mut cost = r.norm_squared();
        let mut lambda = 1e-3;
        let mut stalls = 0;
        let mut checkpoints = Vec::new();
        let mut it = 0;
        while it < cap {
            it += 1;
            if r.amax() < 1e-15 {
                break;
            }
            let jt = jac.transpose();
            let a = &jt * &jac;
            let g = &jt * &r;
            let scale = (0..n).map(|k| a[(k, k)]).fold(f64::MIN_POSITIVE, f64::max);
            let mut accepted = false;
            while lambda < 1e16 {
                let mut lhs = a.clone();
                for k in 0..n {
                    lhs[(k, k)] += lambda * scale;
                }
                let Some(chol) = lhs.cholesky() else {
                    lambda *= 4.0;
                    continue;
                };
                let step = chol.solve(&(-&g));
                let trial: Vec<f64> = phi.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
                let tr = self.residuals(&trial, None);
                let tc = tr.norm_squared();
                if tc < cost {
                    let rel = (cost - tc) / cost.max(f64::MIN_POSITIVE);
                    stalls = if rel < 1e-12 { stalls + 1 } else { 0 };
                    phi = trial;
                    cost = tc;
                    r = self.residuals(&phi, Some(&mut jac));
                    lambda = (lambda / 3.0).max(1e-15);
                    accepted = true;
                    break;
                }
                lambda *= 4.0;
            }
            if !accepted || stalls >= 4 {
                break;
            }
            // Plateau: less than 1% progress over the last PLATEAU_WINDOW iterations.
            if it % PLATEAU_STRIDE == 0 {
                if check.max_error(&phi) <= good_enough {
                    break;
                }
                checkpoints.push(cost);
                let lag = PLATEAU_WINDOW / PLATEAU_STRIDE;
                if checkpoints.len() > lag && cost > 0.99 * checkpoints[checkpoints.len() - 1 - lag] {
                    break;
                }
            }
        }
        (phi, it)
    }
}

/// Stop once the maximum error is this fraction of the requested tolerance.
const EARLY_EXIT_FRACTION: f64 = 0.1;
const PLATEAU_STRIDE: usize = 100;
const PLATEAU_WINDOW: usize = 500;

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return domain(format!("synthesis tolerance must be positive, got {tol}"));
    }
    Ok(())
}

/// Phases of a degree-`degree` Wx sequence whose `realized_value` approximates `target` on
/// `domain_intervals`. Hadamard-basis targets must be real. Non-convergence is reported
/// through `converged`, not as an error.
pub fn synthesize_function(
    target: &dyn Fn(f64) -> C64,
    degree: usize,
    basis: Basis,
    domain_intervals: &[Interval],
    options: &SynthesisOptions,
) -> Result<SynthesisResult> {
    check_tolerance(options.tolerance)?;
    if domain_intervals.is_empty() {
        return domain("synthesis needs at least one domain interval");
    }
    for iv in domain_intervals {
        if !(iv.lo <= iv.hi && iv.lo >= -1.0 && iv.hi <= 1.0) {
            return domain(format!("domain interval [{}, {}] is empty or outside [-1, 1]", iv.lo, iv.hi));
        }
    }
    let (nodes, check) = synthesis_grid(degree, domain_intervals);
    let prob = Problem::new(nodes, target, basis, degree);
    let check = Problem::new(check, target, basis, degree);

    let init = match &options.initial {
        Some(p) if p.len() == degree + 1 => p.clone(),
        Some(p) => {
            return Err(QspError::Dimension(format!(
                "initial guess has {} phases, degree {degree} needs {}",
                p.len(),
                degree + 1
            )))
        }
        None => {
            let mut init = vec![0.0; degree + 1];
            init[0] = FRAC_PI_4;
            init[degree] += FRAC_PI_4;
            init
        }
    };
    let cap = (10 * degree * degree).max(100);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut total_it = 0;
    for attempt in 0..=options.max_restarts {
        let start: Vec<f64> = if attempt == 0 {
            init.clone()
        } else {
            let amp = 0.25 * attempt as f64;
            init.iter().map(|p| p + amp * rng.random_range(-1.0..1.0)).collect()
        };
        let (phi, it) = prob.solve(start, cap, &check, EARLY_EXIT_FRACTION * options.tolerance);
        total_it += it;
        let err = check.max_error(&phi);
        if best.as_ref().is_none_or(|(_, e)| err < *e) {
            best = Some((phi, err));
        }
        if best.as_ref().is_some_and(|(_, e)| *e <= options.tolerance) {
            break;
        }
    }
    let (phi, err) = best.expect("at least one attempt runs");
    Ok(SynthesisResult {
        phases: PhaseVector::wx(phi)?,
        achieved_error: err,
        iterations: total_it,
        converged: err <= options.tolerance,
    })
}

/// Phases for a polynomial target over its `domain_note`, with seed 0.
pub fn synthesize_phases(target: &ChebyshevPolynomial, basis: Basis, tolerance: f64) -> Result<SynthesisResult> {
    synthesize_phases_with(target, basis, &SynthesisOptions::new(tolerance))
}

pub fn synthesize_phases_with(
    target: &ChebyshevPolynomial,
    basis: Basis,
    options: &SynthesisOptions,
) -> Result<SynthesisResult> {
    let d = target.degree();
    if target.parity() != Parity::of_degree(d) {
        return Err(QspError::Contract(format!(
            "a degree-{d} sequence realizes {} polynomials, target is tagged {}",
            Parity::of_degree(d),
            target.parity()
        )));
    }
    if basis == Basis::Hadamard && !target.is_real() {
        return Err(QspError::Contract("hadamard-basis synthesis needs a real target".into()));
    }
    if !target.is_qsp_admissible() {
        return domain("target exceeds modulus 1 on [-1, 1]");
    }
    let f = |x: f64| target.eval_unchecked(x);
    synthesize_function(&f, d, basis, target.domain_note(), options)
}

/// Chebyshev coefficients of the polynomial the phases realize: `P` for the computational
/// basis and `Re P` for the hadamard basis, which is what the QET lift applies.
pub fn realized_polynomial(phases: &PhaseVector, basis: Basis) -> Result<ChebyshevPolynomial> {
    let wx = phases.to_wx();
    let d = wx.degree();
    let vals: Vec<C64> =
        chebyshev_nodes(d + 1).into_iter().map(|x| realize(sequence_m2(&wx, x)[0][0], basis)).collect();
    let mut c = chebyshev_from_samples(&vals);
    let parity = Parity::of_degree(d);
    for (k, v) in c.iter_mut().enumerate() {
        if (k % 2 == 0) != (parity == Parity::Even) {
            *v = ZERO;
        }
    }
    ChebyshevPolynomial::new(c, parity, vec![Interval::FULL])
}

fn projector_diagonal(projector: &[usize], phi: f64, ancilla_qubits: usize, total_qubits: usize) -> Result<Vec<C64>> {
    if projector.is_empty() {
        return domain("projector must select at least one ancilla state");
    }
    if ancilla_qubits > total_qubits {
        return Err(QspError::Dimension(format!("{ancilla_qubits} ancillas exceed a {total_qubits}-qubit register")));
    }
    if let Some(&s) = projector.iter().find(|&&s| s >> ancilla_qubits != 0) {
        return Err(QspError::Dimension(format!("ancilla state {s} needs more than {ancilla_qubits} qubits")));
    }
    let sys = total_qubits - ancilla_qubits;
    let (e, ec) = z_phase(phi);
    Ok((0..1usize << total_qubits).map(|i| if projector.contains(&(i >> sys)) { e } else { ec }).collect())
}

/// `e^{i phi (2 Pi - I)}` with `Pi` projecting the ancilla register (the top
/// `ancilla_qubits` of `total_qubits`) onto the states in `projector`.
pub fn projector_phase(
    projector: &[usize],
    phi: f64,
    ancilla_qubits: usize,
    total_qubits: usize,
) -> Result<ComplexMatrix> {
    let diag = projector_diagonal(projector, phi, ancilla_qubits, total_qubits)?;
    Ok(ComplexMatrix::from_diagonal(&DVector::from_vec(diag)))
}

/// `i^d Pi_{psi_0} V_1 Pi_{psi_1} ... V_d Pi_{psi_d}` with `V_k = U` when `d - k` is even and
/// `U^dagger` otherwise, and `psi` the reflection-convention phases.
fn alternating_sequence(enc: &BlockEncoding, psi: &[f64], global: C64) -> Result<ComplexMatrix> {
    let d = psi.len() - 1;
    let total = enc.total_qubits();
    let proj = [enc.signal_state];
    let adj = enc.unitary.adjoint();
    let diag0 = projector_diagonal(&proj, psi[0], enc.ancilla_qubits, total)?;
    let mut m = ComplexMatrix::from_diagonal(&DVector::from_vec(diag0)) * global;
    for (k, &p) in psi.iter().enumerate().skip(1) {
        m = if (d - k) % 2 == 0 { &m * &enc.unitary } else { &m * &adj };
        let diag = projector_diagonal(&proj, p, enc.ancilla_qubits, total)?;
        for (c, z) in diag.iter().enumerate() {
            for v in m.column_mut(c).iter_mut() {
                *v *= z;
            }
        }
    }
    Ok(m)
}

/// Singular value transformation of the block encoded by `enc`.
///
/// Computational basis: the `<s|.|s>` block becomes `P^{(SV)}(A)`. Hadamard basis: an extra
/// outermost ancilla combines the sequence with its conjugate-phase twin, so the block is
/// `Re P` applied to the singular values (or eigenvalues).
pub fn qsvt_sequence(
    enc: &BlockEncoding,
    phases: &PhaseVector,
    basis: Basis,
    expected: Parity,
) -> Result<BlockEncoding> {
    let d = phases.degree();
    if expected != Parity::of_degree(d) {
        return Err(QspError::Contract(format!(
            "degree-{d} phases give an {} polynomial, caller expects {expected}",
            Parity::of_degree(d)
        )));
    }
    let dim = 1usize << enc.total_qubits();
    if enc.unitary.nrows() != dim || enc.unitary.ncols() != dim {
        return Err(QspError::Dimension(format!(
            "unitary is {}x{}, register has {} qubits",
            enc.unitary.nrows(),
            enc.unitary.ncols(),
            enc.total_qubits()
        )));
    }
    let psi = phases.to_reflection();
    let id = I.powu(d as u32);
    let m = alternating_sequence(enc, psi.phases(), id)?;
    let unitary = match basis {
        Basis::Computational => m,
        Basis::Hadamard => {
            let neg: Vec<f64> = psi.phases().iter().map(|p| -p).collect();
            let mc = alternating_sequence(enc, &neg, id.conj())?;
            let mut ctrl = ComplexMatrix::zeros(2 * dim, 2 * dim);
            ctrl.view_mut((0, 0), (dim, dim)).copy_from(&m);
            ctrl.view_mut((dim, dim), (dim, dim)).copy_from(&mc);
            let h = hadamard_top(dim);
            &h * ctrl * &h
        }
    };
    let extra = usize::from(basis == Basis::Hadamard);
    Ok(BlockEncoding {
        unitary,
        system_qubits: enc.system_qubits,
        ancilla_qubits: enc.ancilla_qubits + extra,
        signal_state: enc.signal_state,
        scale_alpha: enc.scale_alpha,
        beta: enc.beta,
    })
}

/// Eigenvalue transformation: `qsvt_sequence` restricted to encodings of hermitian operators.
pub fn qet_sequence(enc: &BlockEncoding, phases: &PhaseVector, basis: Basis) -> Result<BlockEncoding> {
    let block = extract_block(enc);
    if !is_hermitian(&block, 1e-10) {
        return Err(QspError::Contract("QET needs an encoding of a hermitian operator".into()));
    }
    qsvt_sequence(enc, phases, basis, Parity::of_degree(phases.degree()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::dilation_encoding;
    use crate::numerics::{is_unitary, matrix_exp_hermitian, max_abs};
    use crate::polyapprox::jacobi_anger_cos;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_phases(rng: &mut ChaCha8Rng, d: usize) -> PhaseVector {
        PhaseVector::wx((0..=d).map(|_| rng.random_range(-PI..PI)).collect()).unwrap()
    }

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&DVector::from_vec(v.iter().map(|&x| c(x)).collect()))
    }

    #[test]
    fn signal_operator_examples() {
        assert_eq!(signal_operator(1.0).unwrap(), ComplexMatrix::identity(2, 2));
        let w0 = signal_operator(0.0).unwrap();
        assert_eq!(w0, ComplexMatrix::from_row_slice(2, 2, &[ZERO, I, I, ZERO]));
        let w = signal_operator(0.5).unwrap();
        assert_eq!(w[(0, 0)], c(0.5));
        assert_eq!(w[(0, 1)], C64::new(0.0, 0.75f64.sqrt()));
        assert!(signal_operator(1.0 + 1e-12).is_err());
    }

    #[test]
    fn qsp_unitary_examples() {
        let p = PhaseVector::wx(vec![0.0, 0.0]).unwrap();
        assert_eq!(block_value(&p, 0.3, Basis::Computational).unwrap(), c(0.3));
        assert_eq!(qsp_unitary(&p, 0.3).unwrap(), signal_operator(0.3).unwrap());
        let p = PhaseVector::wx(vec![0.7]).unwrap();
        assert!((block_value(&p, 0.1, Basis::Computational).unwrap() - C64::from_polar(1.0, 0.7)).norm() < 1e-15);
        let p = PhaseVector::wx(vec![0.0]).unwrap();
        assert_eq!(block_value(&p, 0.4, Basis::Hadamard).unwrap(), ONE);
        let p = PhaseVector::wx(vec![0.0, 0.0]).unwrap();
        let x: f64 = 0.35;
        let want = C64::new(x, (1.0 - x * x).sqrt());
        assert!((block_value(&p, x, Basis::Hadamard).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn normalization_identity_and_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let d = rng.random_range(1..=20);
            let p = random_phases(&mut rng, d);
            for i in 0..101 {
                let x = -1.0 + 2.0 * i as f64 / 100.0;
                let u = qsp_unitary(&p, x).unwrap();
                assert!(is_unitary(&u, 1e-12));
                let pv = u[(0, 0)];
                // Q from the off-diagonal entry i Q sqrt(1-x^2); check via the row norm.
                let qs = u[(0, 1)].norm_sqr();
                assert!((pv.norm_sqr() + qs - 1.0).abs() < 1e-10);
                let pm = qsp_unitary(&p, -x).unwrap()[(0, 0)];
                let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
                assert!((pm - pv * sign).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn block_values_match_matrix_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..101 {
            let d = rng.random_range(0..12);
            let p = random_phases(&mut rng, d);
            let x = rng.random_range(-1.0..1.0);
            let u = qsp_unitary(&p, x).unwrap();
            assert_eq!(block_value(&p, x, Basis::Computational).unwrap(), u[(0, 0)]);
            let plus = (u[(0, 0)] + u[(0, 1)] + u[(1, 0)] + u[(1, 1)]) * 0.5;
            assert!((block_value(&p, x, Basis::Hadamard).unwrap() - plus).norm() < 1e-14);
            // <+|U|+> = Re P + i Re Q sqrt(1 - x^2), with i Q sqrt(1-x^2) = U_01.
            let s = (1.0 - x * x).sqrt();
            let q = if s > 0.0 { u[(0, 1)] / (I * s) } else { ZERO };
            let want = C64::new(u[(0, 0)].re, q.re * s);
            assert!((block_value(&p, x, Basis::Hadamard).unwrap() - want).norm() < 1e-12);
        }
    }

    #[test]
    fn reflection_conversion() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for d in 0..8 {
            let p = random_phases(&mut rng, d);
            let r = p.to_reflection();
            assert_eq!(r.convention(), Convention::Reflection);
            let back = r.to_wx();
            for (a, b) in p.phases().iter().zip(back.phases()) {
                assert!((canonical(a - b)).abs() < 1e-14);
            }
            for i in 0..11 {
                let x = -1.0 + 0.2 * i as f64;
                let uw = qsp_unitary(&p, x).unwrap();
                let ur = qsp_unitary(&r, x).unwrap() * I.powu(d as u32);
                assert!(max_abs(&(uw - ur)) < 1e-13);
                assert!(
                    (block_value(&r, x, Basis::Hadamard).unwrap() - block_value(&p, x, Basis::Hadamard).unwrap())
                        .norm()
                        < 1e-13
                );
            }
        }
    }

    #[test]
    fn text_roundtrip_and_canonical_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = PhaseVector::wx((0..9).map(|_| rng.random_range(-20.0..20.0)).collect()).unwrap();
        assert!(p.phases().iter().all(|&v| v > -PI && v <= PI));
        let text = p.to_text();
        assert!(text.starts_with("qsp-phases d=8 convention=wx\n"));
        assert_eq!(PhaseVector::from_text(&text).unwrap(), p);
        let r = p.to_reflection();
        assert_eq!(PhaseVector::from_text(&r.to_text()).unwrap(), r);
        assert_eq!(PhaseVector::wx(vec![-PI]).unwrap().phases(), &[PI]);
        assert!(PhaseVector::from_text("qsp-phases d=2 convention=wx\n0.1\n0.2\n").is_err());
        assert!(PhaseVector::from_text("phases d=0 convention=wx\n0.1\n").is_err());
        assert!(PhaseVector::wx(vec![f64::NAN]).is_err());
    }

    #[test]
    fn synthesis_trivial_targets() {
        let t1 = ChebyshevPolynomial::from_real(&[0.0, 1.0], Parity::Odd).unwrap();
        let r = synthesize_phases(&t1, Basis::Computational, 1e-10).unwrap();
        assert!(r.converged && r.achieved_error < 1e-12, "{r:?}");
        let theta: f64 = 0.9;
        let k =
            ChebyshevPolynomial::new(vec![C64::from_polar(1.0, theta)], Parity::Even, vec![Interval::FULL]).unwrap();
        let r = synthesize_phases(&k, Basis::Computational, 1e-10).unwrap();
        assert!((r.phases.phases()[0] - theta).abs() < 1e-10);
        let bad = ChebyshevPolynomial::from_real(&[0.0, 2.0], Parity::Odd).unwrap();
        assert!(synthesize_phases(&bad, Basis::Hadamard, 1e-3).is_err());
        let mixed = ChebyshevPolynomial::from_real(&[0.1, 0.5], Parity::Mixed).unwrap();
        assert!(matches!(synthesize_phases(&mixed, Basis::Hadamard, 1e-3), Err(QspError::Contract(_))));
    }

    #[test]
    fn warm_start() {
        let target = jacobi_anger_cos(1.5, 1e-6).unwrap();
        let cold = synthesize_phases(&target, Basis::Hadamard, 1e-10).unwrap();
        assert!(cold.converged);
        let opts = SynthesisOptions::new(1e-10).with_initial(&cold.phases.to_reflection());
        let warm = synthesize_phases_with(&target, Basis::Hadamard, &opts).unwrap();
        assert!(warm.converged && warm.iterations <= 1, "{warm:?}");
        let short = SynthesisOptions::new(1e-10).with_initial(&PhaseVector::wx(vec![0.0; 3]).unwrap());
        assert!(matches!(synthesize_phases_with(&target, Basis::Hadamard, &short), Err(QspError::Dimension(_))));
    }

    #[test]
    fn synthesis_jacobi_anger_cos() {
        let target = jacobi_anger_cos(1.0, 1e-4).unwrap();
        let r = synthesize_phases(&target, Basis::Hadamard, 1e-3).unwrap();
        assert!(r.converged && r.achieved_error <= 1e-3, "{r:?}");
        for i in 0..201 {
            let x = -1.0 + 0.01 * i as f64;
            let v = realized_value(&r.phases, x, Basis::Hadamard).unwrap();
            assert!((v - target.eval(x).unwrap()).norm() <= 1e-3);
            let plus = block_value(&r.phases, x, Basis::Hadamard).unwrap();
            assert!((plus.re - v.re).abs() < 1e-14);
        }
        let again = synthesize_phases(&target, Basis::Hadamard, 1e-3).unwrap();
        assert_eq!(again, r);
        let realized = realized_polynomial(&r.phases, Basis::Hadamard).unwrap();
        for i in 0..21 {
            let x = -1.0 + 0.1 * i as f64;
            assert!((realized.eval(x).unwrap() - target.eval(x).unwrap()).norm() < 1e-3);
        }
    }

    #[test]
    fn projector_phase_examples() {
        assert_eq!(projector_phase(&[0], 0.0, 1, 2).unwrap(), ComplexMatrix::identity(4, 4));
        let p = projector_phase(&[0], FRAC_PI_2, 1, 1).unwrap();
        assert!(max_abs(&(p - ComplexMatrix::from_row_slice(2, 2, &[I, ZERO, ZERO, -I]))) < 1e-15);
        // (2 Pi - I) is the phase at pi/2 divided by i.
        let refl = projector_phase(&[1, 2], FRAC_PI_2, 2, 3).unwrap() * (-I);
        assert!(max_abs(&(&refl * &refl - ComplexMatrix::identity(8, 8))) < 1e-15);
        assert!(projector_phase(&[], 0.1, 1, 1).is_err());
        assert!(projector_phase(&[2], 0.1, 1, 1).is_err());
    }

    #[test]
    fn qet_examples() {
        let enc = dilation_encoding(&diag(&[0.3, -0.7]), 1.0).unwrap();
        let t2 = PhaseVector::wx(vec![0.0; 3]).unwrap();
        let out = qet_sequence(&enc, &t2, Basis::Computational).unwrap();
        assert!(max_abs(&(extract_block(&out) - diag(&[-0.82, -0.02]))) < 1e-12);
        let id = PhaseVector::wx(vec![0.0, 0.0]).unwrap();
        let out = qet_sequence(&enc, &id, Basis::Computational).unwrap();
        assert!(max_abs(&(extract_block(&out) - diag(&[0.3, -0.7]))) < 1e-12);
        let theta = 0.4;
        let out = qet_sequence(&enc, &PhaseVector::wx(vec![theta]).unwrap(), Basis::Computational).unwrap();
        assert!(max_abs(&(extract_block(&out) - ComplexMatrix::identity(2, 2) * C64::from_polar(1.0, theta))) < 1e-12);
        assert!(matches!(qsvt_sequence(&enc, &id, Basis::Computational, Parity::Even), Err(QspError::Contract(_))));
    }

    #[test]
    fn qet_diagonal_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let levels = [-0.9, -0.3, 0.2, 0.8];
        let phases: Vec<PhaseVector> = [4usize, 5].iter().map(|&d| random_phases(&mut rng, d)).collect();
        for code in 0..256 {
            let vals: Vec<f64> = (0..4).map(|i| levels[(code >> (2 * i)) & 3]).collect();
            let enc = dilation_encoding(&diag(&vals), 1.0).unwrap();
            for p in &phases {
                for basis in [Basis::Computational, Basis::Hadamard] {
                    let out = qet_sequence(&enc, p, basis).unwrap();
                    assert!(out.is_unitary(1e-9));
                    let b = extract_block(&out);
                    for i in 0..4 {
                        for j in 0..4 {
                            let want = if i != j { ZERO } else { realized_value(p, vals[i], basis).unwrap() };
                            assert!((b[(i, j)] - want).norm() < 1e-9);
                        }
                    }
                }
            }
        }
    }

    fn rotation_encoding(r: f64, theta: f64) -> BlockEncoding {
        // A = r e^{i theta Z} is normal, so [[A, s I], [s I, -A^dagger]] is unitary.
        let a =
            ComplexMatrix::from_row_slice(2, 2, &[C64::from_polar(r, theta), ZERO, ZERO, C64::from_polar(r, -theta)]);
        let s = ComplexMatrix::identity(2, 2) * c((1.0 - r * r).sqrt());
        let mut u = ComplexMatrix::zeros(4, 4);
        u.view_mut((0, 0), (2, 2)).copy_from(&a);
        u.view_mut((0, 2), (2, 2)).copy_from(&s);
        u.view_mut((2, 0), (2, 2)).copy_from(&s);
        u.view_mut((2, 2), (2, 2)).copy_from(&(-a.adjoint()));
        BlockEncoding { unitary: u, system_qubits: 1, ancilla_qubits: 1, signal_state: 0, scale_alpha: 1.0, beta: None }
    }

    #[test]
    fn odd_transformation_preserves_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let r = rng.random_range(0.05..0.95);
            let theta = rng.random_range(-PI..PI);
            let d = 2 * rng.random_range(0..5) + 1;
            let p = random_phases(&mut rng, d);
            let out = qsvt_sequence(&rotation_encoding(r, theta), &p, Basis::Computational, Parity::Odd).unwrap();
            let b = extract_block(&out);
            let pr = block_value(&p, r, Basis::Computational).unwrap();
            let want = [pr * C64::from_polar(1.0, theta), pr * C64::from_polar(1.0, -theta)];
            assert!((b[(0, 0)] - want[0]).norm() < 1e-8 && (b[(1, 1)] - want[1]).norm() < 1e-8);
            assert!(b[(0, 1)].norm() < 1e-8 && b[(1, 0)].norm() < 1e-8);
        }
    }

    #[test]
    fn odd_amplification_recovers_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        // -T_3 has modulus 1 at x = 1/2.
        let p = PhaseVector::wx(vec![FRAC_PI_2, 0.0, 0.0, FRAC_PI_2]).unwrap();
        assert!((block_value(&p, 0.5, Basis::Computational).unwrap() - ONE).norm() < 1e-14);
        for _ in 0..5 {
            let mut h = ComplexMatrix::zeros(4, 4);
            for v in h.iter_mut() {
                *v = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            let u0 = matrix_exp_hermitian(&(&h + h.adjoint()), 1.0).unwrap();
            let s = ComplexMatrix::identity(4, 4) * c(0.75f64.sqrt());
            let a = u0.scale(0.5);
            let mut u = ComplexMatrix::zeros(8, 8);
            u.view_mut((0, 0), (4, 4)).copy_from(&a);
            u.view_mut((0, 4), (4, 4)).copy_from(&s);
            u.view_mut((4, 0), (4, 4)).copy_from(&s);
            u.view_mut((4, 4), (4, 4)).copy_from(&(-a.adjoint()));
            let enc = BlockEncoding {
                unitary: u,
                system_qubits: 2,
                ancilla_qubits: 1,
                signal_state: 0,
                scale_alpha: 1.0,
                beta: None,
            };
            let out = qsvt_sequence(&enc, &p, Basis::Computational, Parity::Odd).unwrap();
            assert!(max_abs(&(extract_block(&out) - &u0)) < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn sequences_are_unitary(seed in any::<u64>(), d in 0usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_phases(&mut rng, d);
            let mut h = ComplexMatrix::zeros(4, 4);
            for v in h.iter_mut() {
                *v = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            let h = &h + h.adjoint();
            let enc = dilation_encoding(&h, crate::numerics::spectral_norm(&h) * 1.1).unwrap();
            for basis in [Basis::Computational, Basis::Hadamard] {
                let out = qet_sequence(&enc, &p, basis).unwrap();
                prop_assert!(out.is_unitary(1e-9));
            }
        }
    }
}
