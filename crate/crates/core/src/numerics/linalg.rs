// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, QspError, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

const HERMITIAN_TOL: f64 = 1e-12;
const CLAMP_WINDOW: f64 = 1e-12;

/// Pure state on `qubit_count` qubits; qubit 0 is the most significant tensor factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    pub amplitudes: DVector<C64>,
    pub qubit_count: usize,
}

impl Statevector {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(QspError::Dimension(format!("statevector length {len} is not 2^q")));
        }
        Ok(Self { amplitudes, qubit_count: len.trailing_zeros() as usize })
    }

    /// Computational basis state `|index>`.
    pub fn basis(qubit_count: usize, index: usize) -> Self {
        let mut amplitudes = DVector::from_element(1 << qubit_count, C64::new(0.0, 0.0));
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes, qubit_count }
    }

    /// Basis state from a bit string such as `"0101"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let q = bits.len();
        let idx = usize::from_str_radix(bits, 2).map_err(|_| QspError::Domain(format!("bad bit string {bits:?}")))?;
        Ok(Self::basis(q, idx))
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-10
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Single-qubit Pauli matrix for `'I' | 'X' | 'Y' | 'Z'`.
pub fn pauli(c: char) -> Option<ComplexMatrix> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let v = match c {
        'I' => [l, o, o, l],
        'X' => [o, l, l, o],
        'Y' => [o, -i, i, o],
        'Z' => [l, o, o, -l],
        _ => return None,
    };
    Some(ComplexMatrix::from_row_slice(2, 2, &v))
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m.adjoint() * m - identity(m.nrows()))) <= tol
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(QspError::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let tol = HERMITIAN_TOL * max_abs(m).max(1.0);
    if !is_hermitian(m, tol) {
        return Err(QspError::Contract("matrix is not hermitian".into()));
    }
    Ok(())
}

/// Eigendecomposition of a hermitian matrix with eigenvalues in ascending order.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_hermitian(m)?;
    let n = m.nrows();
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// `f(H) = sum_l f(l) |l><l|` for hermitian `H`.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> C64) -> Result<ComplexMatrix> {
    let (vals, vecs) = hermitian_eig(m)?;
    Ok(spectral_apply(&vals, &vecs, f))
}

fn spectral_apply(vals: &[f64], vecs: &ComplexMatrix, f: impl Fn(f64) -> C64) -> ComplexMatrix {
    let mut scaled = vecs.clone();
    for (k, &l) in vals.iter().enumerate() {
        let fk = f(l);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= fk;
        }
    }
    scaled * vecs.adjoint()
}

/// `e^{-iHt}` from the eigendecomposition of `H`.
pub fn matrix_exp_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if t == 0.0 {
        check_hermitian(h)?;
        return Ok(identity(h.nrows()));
    }
    hermitian_function(h, |l| C64::from_polar(1.0, -l * t))
}

/// `sqrt(I - H^2 / alpha^2)`; eigenvalues of the radicand in `[-1e-12, 0)` are clamped to 0.
pub fn hermitian_sqrt_complement(h: &ComplexMatrix, alpha: f64) -> Result<ComplexMatrix> {
    if !(alpha > 0.0) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    let (vals, vecs) = hermitian_eig(h)?;
    for &l in &vals {
        let r = 1.0 - (l / alpha) * (l / alpha);
        if r < -CLAMP_WINDOW {
            return domain(format!("alpha = {alpha} is below the spectral norm (eigenvalue {l})"));
        }
    }
    Ok(spectral_apply(&vals, &vecs, |l| C64::new((1.0 - (l / alpha) * (l / alpha)).max(0.0).sqrt(), 0.0)))
}

/// Lift an operator on the qubits `targets` (listed most significant first) of an
/// `n`-qubit register to the full `2^n` space, acting as identity elsewhere.
pub fn embed(op: &ComplexMatrix, targets: &[usize], n: usize) -> Result<ComplexMatrix> {
    let k = targets.len();
    if op.nrows() != 1 << k || op.ncols() != 1 << k {
        return Err(QspError::Dimension(format!("operator {}x{} does not act on {k} qubits", op.nrows(), op.ncols())));
    }
    let mut seen = 0usize;
    for &t in targets {
        if t >= n || seen & (1 << t) != 0 {
            return Err(QspError::Dimension(format!("bad target qubit {t} for {n} qubits")));
        }
        seen |= 1 << t;
    }
    // Bit position (from the least significant end) of each target.
    let shifts: Vec<usize> = targets.iter().map(|&t| n - 1 - t).collect();
    let mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
    let sub = |i: usize| -> usize { shifts.iter().fold(0, |acc, &s| (acc << 1) | ((i >> s) & 1)) };
    let spread = |mut r: usize| -> usize {
        let mut out = 0;
        for &s in shifts.iter().rev() {
            out |= (r & 1) << s;
            r >>= 1;
        }
        out
    };
    let dim = 1usize << n;
    let mut full = ComplexMatrix::zeros(dim, dim);
    for row in 0..dim {
        let rest = row & !mask;
        let r = sub(row);
        for c in 0..(1usize << k) {
            let v = op[(r, c)];
            if v != C64::new(0.0, 0.0) {
                full[(row, rest | spread(c))] = v;
            }
        }
    }
    Ok(full)
}
