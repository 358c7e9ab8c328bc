// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Hamiltonian-simulation algorithms built from QET sequences, a Trotterized driver for
//! time-dependent Hamiltonians, exact oracles and observables.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;

use crate::encoding::{dilation_encoding, extract_block, hadamard_top, pauli_sum_to_matrix, BlockEncoding, PauliSum};
use crate::error::{domain, QspError, Result};
use crate::numerics::{identity, matrix_exp_hermitian, spectral_norm, ComplexMatrix, Statevector, C64};
use crate::polyapprox::{Interval, Parity};
use crate::qsp::{qet_sequence, qsvt_sequence, realized_value, Basis, PhaseVector};

/// Points per unit length used when measuring polynomial errors.
const ERROR_GRID: usize = 401;
const RK4_MAX_DOUBLINGS: usize = 8;
const RK4_TOL: f64 = 1e-8;

/// Result of one simulation call.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    /// Post-selected, renormalized system state.
    pub final_state: Statevector,
    pub success_probability: f64,
    /// The encoded block: `1/2 e^{-iHt}` for `qsp_lcu`, `e^{-iHt}` for the others (one-shot
    /// with its global phase removed).
    pub block_operator: ComplexMatrix,
    /// Spectral-norm distance between the (rescaled) block and `e^{-iHt}`.
    pub operator_error: f64,
    pub queries_used: usize,
}

/// `H(t)` sampled at the left end of each of `steps` equal intervals of `[0, total_time]`.
#[derive(Clone)]
pub struct TimeDependentSpec {
    pub hamiltonian_at: Arc<dyn Fn(f64) -> Result<PauliSum> + Send + Sync>,
    pub total_time: f64,
    pub steps: usize,
}

impl TimeDependentSpec {
    pub fn new(
        hamiltonian_at: impl Fn(f64) -> Result<PauliSum> + Send + Sync + 'static,
        total_time: f64,
        steps: usize,
    ) -> Result<Self> {
        if steps == 0 {
            return domain("a Trotter schedule needs at least one step");
        }
        if !(total_time >= 0.0 && total_time.is_finite()) {
            return domain(format!("total time must be finite and non-negative, got {total_time}"));
        }
        Ok(Self { hamiltonian_at: Arc::new(hamiltonian_at), total_time, steps })
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    pub fn matrix_at(&self, t: f64) -> Result<ComplexMatrix> {
        pauli_sum_to_matrix(&(self.hamiltonian_at)(t)?)
    }
}

impl std::fmt::Debug for TimeDependentSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TimeDependentSpec")
            .field("total_time", &self.total_time)
            .field("steps", &self.steps)
            .finish_non_exhaustive()
    }
}

fn real_grid(iv: Interval) -> Vec<f64> {
    let n = ((iv.hi - iv.lo) * ERROR_GRID as f64).ceil() as usize + 1;
    iv.grid(n.max(2))
}

/// Measured `sup |Re P_cos - cos(tau x)| + sup |Re P_sin - sin(tau x)|` over `[-1, 1]`: the
/// bound on `||2B - e^{-iHt}||` for the LCU block `B`.
pub fn lcu_phase_error(phases_cos: &PhaseVector, phases_sin: &PhaseVector, tau: f64) -> Result<f64> {
    let mut ec: f64 = 0.0;
    let mut es: f64 = 0.0;
    for x in real_grid(Interval::new(-1.0, 1.0)) {
        let c = realized_value(phases_cos, x, Basis::Hadamard)?.re;
        let s = realized_value(phases_sin, x, Basis::Hadamard)?.re;
        ec = ec.max((c - (tau * x).cos()).abs());
        es = es.max((s - (tau * x).sin()).abs());
    }
    Ok(ec + es)
}

/// Measured `sup |P(x) - e^{-i tau x}|` over the pre-transformed spectrum
/// `[(1 - beta)/2, (1 + beta)/2]`.
pub fn eece_phase_error(phases: &PhaseVector, tau: f64, beta: f64) -> Result<f64> {
    let iv = Interval::new(0.5 * (1.0 - beta), 0.5 * (1.0 + beta));
    let mut e: f64 = 0.0;
    for x in real_grid(iv) {
        let p = realized_value(phases, x, Basis::Computational)?;
        e = e.max((p - C64::from_polar(1.0, -tau * x)).norm());
    }
    Ok(e)
}

/// `H = alpha * block` for an unscaled encoding of `H / alpha`.
fn hamiltonian_of(enc: &BlockEncoding) -> Result<ComplexMatrix> {
    if enc.beta.is_some() {
        return Err(QspError::Contract("LCU-family algorithms need an unscaled encoding of H/alpha".into()));
    }
    Ok(extract_block(enc).scale(enc.scale_alpha))
}

fn check_state(enc: &BlockEncoding, psi0: &Statevector) -> Result<()> {
    if psi0.dim() != enc.system_dim() {
        return Err(QspError::Dimension(format!(
            "state has dimension {}, encoding acts on {}",
            psi0.dim(),
            enc.system_dim()
        )));
    }
    Ok(())
}

fn check_budget(measured: f64, epsilon: f64, what: &str) -> Result<()> {
    if !(epsilon > 0.0) {
        return domain(format!("epsilon must be positive, got {epsilon}"));
    }
    if measured > epsilon {
        return Err(QspError::Contract(format!(
            "{what} phases are {measured:.3e} from their target, budget is {epsilon:.3e}"
        )));
    }
    Ok(())
}

/// Applies `enc` to `|signal> (x) psi0` and projects the ancillas back onto `|signal>`.
pub fn apply_and_postselect(enc: &BlockEncoding, psi0: &Statevector) -> Result<(Statevector, f64)> {
    check_state(enc, psi0)?;
    let n = enc.system_dim();
    let start = enc.signal_state * n;
    let mut full = DVector::zeros(enc.unitary.nrows());
    full.rows_mut(start, n).copy_from(&psi0.amplitudes);
    let out = &enc.unitary * full;
    let projected = out.rows(start, n).into_owned();
    let p = projected.norm_squared();
    if p <= 1e-300 {
        return Err(QspError::Degenerate("post-selection has zero probability".into()));
    }
    let state = Statevector::new(projected.unscale(p.sqrt()))?;
    Ok((state, p.min(1.0)))
}

fn outcome(
    enc: &BlockEncoding,
    psi0: &Statevector,
    block_operator: ComplexMatrix,
    operator_error: f64,
    queries_used: usize,
) -> Result<SimulationOutcome> {
    let (final_state, success_probability) = apply_and_postselect(enc, psi0)?;
    Ok(SimulationOutcome { final_state, success_probability, block_operator, operator_error, queries_used })
}

/// Unitary of the LCU circuit, `(H (x) I) (|0><0| (x) C + |1><1| (x) (-i) S) (H (x) I)`, with
/// `C` and `S` the hadamard-basis QET lifts of the cosine and sine phases. The LCU qubit is
/// outermost, so the `|0>|s>` block is `(cos(Ht) - i sin(Ht)) / 2` up to the polynomial error.
pub fn lcu_encoding(enc: &BlockEncoding, phases_cos: &PhaseVector, phases_sin: &PhaseVector) -> Result<BlockEncoding> {
    if phases_cos.degree() % 2 != 0 || phases_sin.degree() % 2 != 1 {
        return Err(QspError::Contract(format!(
            "cosine phases need even degree and sine phases odd, got {} and {}",
            phases_cos.degree(),
            phases_sin.degree()
        )));
    }
    let c = qet_sequence(enc, phases_cos, Basis::Hadamard)?;
    let s = qet_sequence(enc, phases_sin, Basis::Hadamard)?;
    let dim = c.unitary.nrows();
    let mut ctrl = ComplexMatrix::zeros(2 * dim, 2 * dim);
    ctrl.view_mut((0, 0), (dim, dim)).copy_from(&c.unitary);
    ctrl.view_mut((dim, dim), (dim, dim)).copy_from(&s.unitary.map(|z| z * C64::new(0.0, -1.0)));
    let h = hadamard_top(dim);
    Ok(BlockEncoding {
        unitary: &h * ctrl * &h,
        system_qubits: enc.system_qubits,
        ancilla_qubits: c.ancilla_qubits + 1,
        signal_state: c.signal_state,
        scale_alpha: enc.scale_alpha,
        beta: None,
    })
}

/// LCU of two QET executions: returns the LCU encoding and an outcome whose block is
/// `~ e^{-iHt} / 2` and whose `operator_error` is `||2B - e^{-iHt}||`.
pub fn qsp_lcu(
    enc: &BlockEncoding,
    psi0: &Statevector,
    t: f64,
    epsilon: f64,
    phases_cos: &PhaseVector,
    phases_sin: &PhaseVector,
) -> Result<(BlockEncoding, SimulationOutcome)> {
    check_state(enc, psi0)?;
    let h = hamiltonian_of(enc)?;
    let tau = enc.scale_alpha * t;
    check_budget(lcu_phase_error(phases_cos, phases_sin, tau)?, epsilon, "LCU")?;
    let lcu = lcu_encoding(enc, phases_cos, phases_sin)?;
    let block = extract_block(&lcu);
    let exact = matrix_exp_hermitian(&h, t)?;
    let err = spectral_norm(&(block.scale(2.0) - exact));
    let queries = phases_cos.degree() + phases_sin.degree();
    let out = outcome(&lcu, psi0, block, err, queries)?;
    Ok((lcu, out))
}

/// LCU followed by fixed-point amplification: the odd sign polynomial applied by QSVT to the
/// singular values of the LCU block lifts them from `~1/2` to `~1` while keeping the phases.
#[allow(clippy::too_many_arguments)]
pub fn qsp_lcu_aa(
    enc: &BlockEncoding,
    psi0: &Statevector,
    t: f64,
    epsilon: f64,
    delta: f64,
    phases_cos: &PhaseVector,
    phases_sin: &PhaseVector,
    phases_sign: &PhaseVector,
) -> Result<SimulationOutcome> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    let (lcu, _) = qsp_lcu(enc, psi0, t, epsilon, phases_cos, phases_sin)?;
    let amplified = qsvt_sequence(&lcu, phases_sign, Basis::Hadamard, Parity::Odd)?;
    let block = extract_block(&amplified);
    let exact = matrix_exp_hermitian(&hamiltonian_of(enc)?, t)?;
    let err = spectral_norm(&(&block - exact));
    let queries = phases_sign.degree() * (phases_cos.degree() + phases_sin.degree());
    outcome(&amplified, psi0, block, err, queries)
}

/// `A = -W R W^dagger R W` with `R = I - 2P` and `P` the projector onto the signal state of
/// the ancilla register of `w`.
pub fn roaa_encoding(w: &BlockEncoding) -> BlockEncoding {
    let dim = w.unitary.nrows();
    let n = w.system_dim();
    let mut r = identity(dim);
    for i in w.signal_state * n..(w.signal_state + 1) * n {
        r[(i, i)] = C64::new(-1.0, 0.0);
    }
    let wd = w.unitary.adjoint();
    let a = (&w.unitary * &r * wd * &r * &w.unitary).map(|z| -z);
    BlockEncoding { unitary: a, ..w.clone() }
}

/// Robust oblivious amplitude amplification of the LCU circuit: three LCU calls.
pub fn qsp_lcu_roaa(
    enc: &BlockEncoding,
    psi0: &Statevector,
    t: f64,
    epsilon: f64,
    phases_cos: &PhaseVector,
    phases_sin: &PhaseVector,
) -> Result<SimulationOutcome> {
    let (lcu, first) = qsp_lcu(enc, psi0, t, epsilon, phases_cos, phases_sin)?;
    let a = roaa_encoding(&lcu);
    let block = extract_block(&a);
    let exact = matrix_exp_hermitian(&hamiltonian_of(enc)?, t)?;
    let err = spectral_norm(&(&block - exact));
    outcome(&a, psi0, block, err, 3 * first.queries_used)
}

/// `min_phi ||a e^{i phi} - b||` and the minimizing `phi`.
pub fn phase_aligned_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> (f64, f64) {
    let f = |phi: f64| spectral_norm(&(a * C64::from_polar(1.0, phi) - b));
    let samples = 64;
    let (mut best_phi, mut best) = (0.0, f64::INFINITY);
    for k in 0..samples {
        let phi = -PI + 2.0 * PI * k as f64 / samples as f64;
        let v = f(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    // Golden-section refinement inside the bracketing cell pair.
    let h = 2.0 * PI / samples as f64;
    let (mut lo, mut hi) = (best_phi - h, best_phi + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let phi = 0.5 * (lo + hi);
    let v = f(phi);
    if v < best {
        (v, phi)
    } else {
        (best, best_phi)
    }
}

/// One-shot simulation: QET of the EECE phases on the pre-transformed encoding of
/// `(I + beta H/alpha) / 2`, with `tau = 2 t alpha / beta`. The reported block has the global
/// phase `e^{-i t alpha / beta}` removed; `operator_error` additionally minimizes over any
/// residual global phase.
pub fn one_shot(
    enc: &BlockEncoding,
    psi0: &Statevector,
    t: f64,
    epsilon: f64,
    beta: f64,
    phases_eece: &PhaseVector,
) -> Result<SimulationOutcome> {
    check_state(enc, psi0)?;
    if enc.beta != Some(beta) {
        return Err(QspError::Contract(format!(
            "one-shot needs an encoding pre-transformed with beta = {beta}, got {:?}",
            enc.beta
        )));
    }
    if phases_eece.degree() % 2 != 0 {
        return Err(QspError::Contract(format!("EECE phases need even degree, got {}", phases_eece.degree())));
    }
    let alpha = enc.scale_alpha;
    let tau = 2.0 * t * alpha / beta;
    check_budget(eece_phase_error(phases_eece, tau, beta)?, epsilon, "EECE")?;
    let pre = extract_block(enc);
    let h = (pre.scale(2.0) - identity(pre.nrows())).scale(alpha / beta);
    let lifted = qet_sequence(enc, phases_eece, Basis::Computational)?;
    let block = extract_block(&lifted) * C64::from_polar(1.0, t * alpha / beta);
    let exact = matrix_exp_hermitian(&h, t)?;
    let (err, _) = phase_aligned_distance(&block, &exact);
    outcome(&lifted, psi0, block, err, phases_eece.degree())
}

/// Per-step algorithm of a Trotterized run; the same phases are reused every step.
#[derive(Debug, Clone, PartialEq)]
pub enum StepAlgorithm {
    Roaa { phases_cos: PhaseVector, phases_sin: PhaseVector },
    OneShot { beta: f64, phases_eece: PhaseVector },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepConfig {
    pub alpha: f64,
    pub epsilon: f64,
    pub algorithm: StepAlgorithm,
}

/// A Trotterized run. `steps[k]` holds the step-`k` block, its error against
/// `e^{-i H(k dt) dt}`, the per-step success probability, and the cumulative state after step `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrotterRun {
    pub steps: Vec<SimulationOutcome>,
    /// Product of the per-step success probabilities up to and including each step.
    pub cumulative_success: Vec<f64>,
}

/// Chains the step blocks coherently: the state is carried through each block and renormalized,
/// so the per-step probabilities multiply to the probability of post-selecting the whole chain.
pub fn trotter_evolve(spec: &TimeDependentSpec, psi0: &Statevector, config: &StepConfig) -> Result<TrotterRun> {
    let dt = spec.dt();
    let mut state = psi0.clone();
    let mut steps = Vec::with_capacity(spec.steps);
    let mut cumulative_success = Vec::with_capacity(spec.steps);
    let mut cum = 1.0;
    for k in 0..spec.steps {
        let h = spec.matrix_at(k as f64 * dt)?;
        let enc = dilation_encoding(&h, config.alpha)?;
        let out = match &config.algorithm {
            StepAlgorithm::Roaa { phases_cos, phases_sin } => {
                qsp_lcu_roaa(&enc, &state, dt, config.epsilon, phases_cos, phases_sin)?
            }
            StepAlgorithm::OneShot { beta, phases_eece } => {
                let pre = crate::encoding::pretransform_encoding(&enc, *beta)?;
                one_shot(&pre, &state, dt, config.epsilon, *beta, phases_eece)?
            }
        };
        cum *= out.success_probability;
        cumulative_success.push(cum);
        state = out.final_state.clone();
        steps.push(out);
    }
    Ok(TrotterRun { steps, cumulative_success })
}

/// Ideal Trotterization: the states `prod_{j<=k} e^{-i H(j dt) dt} psi0` for each step `k`.
pub fn ideal_trotter_states(spec: &TimeDependentSpec, psi0: &Statevector) -> Result<Vec<Statevector>> {
    let dt = spec.dt();
    let mut v = psi0.amplitudes.clone();
    let mut out = Vec::with_capacity(spec.steps);
    for k in 0..spec.steps {
        let u = matrix_exp_hermitian(&spec.matrix_at(k as f64 * dt)?, dt)?;
        v = u * v;
        out.push(Statevector::new(v.clone())?);
    }
    Ok(out)
}

fn rk4(spec: &TimeDependentSpec, t_end: f64, n: usize) -> Result<ComplexMatrix> {
    let dim = spec.matrix_at(0.0)?.nrows();
    let mut u = identity(dim);
    if n == 0 || t_end == 0.0 {
        return Ok(u);
    }
    let h = t_end / n as f64;
    let mi = C64::new(0.0, -1.0);
    let f = |t: f64, u: &ComplexMatrix| -> Result<ComplexMatrix> { Ok(spec.matrix_at(t)? * u * mi) };
    for k in 0..n {
        let t = k as f64 * h;
        let k1 = f(t, &u)?;
        let k2 = f(t + 0.5 * h, &(&u + k1.scale(0.5 * h)))?;
        let k3 = f(t + 0.5 * h, &(&u + k2.scale(0.5 * h)))?;
        let k4 = f(t + h, &(&u + k3.scale(h)))?;
        u += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
    }
    Ok(u)
}

/// Nearest unitary in the polar sense.
fn polar_unitary(m: ComplexMatrix) -> ComplexMatrix {
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    u * vt
}

/// Time-ordered propagator of `i dU/dt = H(t) U` over `[0, t_end]` by classical RK4 with
/// `substeps_per_unit` steps per unit time, doubled until halving the step changes the result
/// by less than `1e-8`, then projected onto the unitaries.
pub fn exact_evolution_td(spec: &TimeDependentSpec, t_end: f64, substeps_per_unit: usize) -> Result<ComplexMatrix> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return domain(format!("end time must be finite and non-negative, got {t_end}"));
    }
    if substeps_per_unit == 0 {
        return domain("substeps must be positive");
    }
    let mut n = ((t_end * substeps_per_unit as f64).ceil() as usize).max(1);
    let mut coarse = rk4(spec, t_end, n)?;
    for _ in 0..RK4_MAX_DOUBLINGS {
        n *= 2;
        let fine = rk4(spec, t_end, n)?;
        let change = spectral_norm(&(&fine - &coarse));
        if change < RK4_TOL {
            return Ok(polar_unitary(fine));
        }
        coarse = fine;
    }
    Err(QspError::Accuracy(format!("RK4 did not settle below {RK4_TOL:e} after {RK4_MAX_DOUBLINGS} doublings")))
}

fn check_site(psi: &Statevector, site: usize) -> Result<()> {
    if site >= psi.qubit_count {
        return Err(QspError::Dimension(format!("site {site} out of range for {} qubits", psi.qubit_count)));
    }
    Ok(())
}

/// Probability that qubit `site` (0 = most significant) reads 1.
fn excitation(psi: &Statevector, site: usize) -> f64 {
    let shift = psi.qubit_count - 1 - site;
    psi.amplitudes.iter().enumerate().filter(|(i, _)| (i >> shift) & 1 == 1).map(|(_, a)| a.norm_sqr()).sum::<f64>()
        / psi.amplitudes.norm_squared()
}

/// `<psi| Z_site |psi>` with sites counted from 0 at the most significant qubit.
pub fn expectation_sigma_z(psi: &Statevector, site: usize) -> Result<f64> {
    check_site(psi, site)?;
    Ok((1.0 - 2.0 * excitation(psi, site)).clamp(-1.0, 1.0))
}

/// Total occupation `<(I - Z_i)/2> + <(I - Z_j)/2>` of two spin orbitals.
pub fn occupation_number(psi: &Statevector, orbitals: (usize, usize)) -> Result<f64> {
    check_site(psi, orbitals.0)?;
    check_site(psi, orbitals.1)?;
    Ok(excitation(psi, orbitals.0) + excitation(psi, orbitals.1))
}
