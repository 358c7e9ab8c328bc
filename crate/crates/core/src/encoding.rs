// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pauli-sum Hamiltonians and block encodings.
//!
//! Ancilla qubits are the most significant qubits of a block encoding's register, and each
//! constructor adds its new ancilla as the outermost one. `signal_state` indexes the whole
//! ancilla register, so the encoded block is a leading-diagonal sub-matrix.

use std::fs;
use std::path::Path;

use crate::error::{domain, QspError, Result};
use crate::numerics::{
    embed, hermitian_sqrt_complement, identity, is_hermitian, is_unitary, kron, pauli, ComplexMatrix, C64,
};

/// `sum_j c_j P_j` over Pauli strings of a common length. Qubit 0 is the leftmost letter.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    terms: Vec<(f64, String)>,
    qubit_count: usize,
}

impl PauliSum {
    /// Zero-coefficient terms are dropped.
    pub fn new(terms: Vec<(f64, String)>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(QspError::EmptySum);
        };
        let n = first.1.len();
        if n == 0 {
            return domain("Pauli strings must be nonempty");
        }
        for (c, s) in &terms {
            if s.len() != n {
                return Err(QspError::Dimension(format!("Pauli string {s} has length {}, expected {n}", s.len())));
            }
            if let Some(bad) = s.chars().find(|ch| !matches!(ch, 'I' | 'X' | 'Y' | 'Z')) {
                return domain(format!("invalid Pauli letter {bad:?} in {s}"));
            }
            if !c.is_finite() {
                return domain(format!("coefficient of {s} is not finite"));
            }
        }
        let terms = terms.into_iter().filter(|(c, _)| *c != 0.0).collect();
        Ok(Self { terms, qubit_count: n })
    }

    pub fn terms(&self) -> &[(f64, String)] {
        &self.terms
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn coefficient(&self, string: &str) -> f64 {
        self.terms.iter().filter(|(_, s)| s == string).map(|(c, _)| c).sum()
    }
}

/// Dense hermitian matrix of a Pauli sum.
pub fn pauli_sum_to_matrix(p: &PauliSum) -> Result<ComplexMatrix> {
    let dim = 1usize << p.qubit_count;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (c, s) in &p.terms {
        let mut m = ComplexMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for ch in s.chars() {
            let single = pauli(ch).ok_or_else(|| QspError::Domain(format!("invalid Pauli letter {ch:?}")))?;
            m = kron(&m, &single);
        }
        out += m * C64::new(*c, 0.0);
    }
    Ok(out)
}

fn single_site(n: usize, sites: &[usize], letter: char) -> String {
    (0..n).map(|q| if sites.contains(&q) { letter } else { 'I' }).collect()
}

/// Open-chain Heisenberg model `sum_j h_j Z_j + sum_j (gx X_j X_{j+1} + gy Y_j Y_{j+1} + gz Z_j Z_{j+1})`.
///
/// `couplings[j]` holds `(gx, gy, gz)` for the bond between sites `j` and `j+1`.
pub fn heisenberg_hamiltonian(n: usize, couplings: &[[f64; 3]], fields: &[f64]) -> Result<PauliSum> {
    if n < 2 {
        return domain(format!("the Heisenberg chain needs at least 2 sites, got {n}"));
    }
    if couplings.len() != n - 1 || fields.len() != n {
        return Err(QspError::Dimension(format!(
            "{n} sites need {} bond couplings and {n} fields, got {} and {}",
            n - 1,
            couplings.len(),
            fields.len()
        )));
    }
    let mut terms = Vec::with_capacity(4 * n);
    for (j, &h) in fields.iter().enumerate() {
        terms.push((h, single_site(n, &[j], 'Z')));
    }
    for (j, g) in couplings.iter().enumerate() {
        for (&gk, letter) in g.iter().zip(['X', 'Y', 'Z']) {
            terms.push((gk, single_site(n, &[j, j + 1], letter)));
        }
    }
    if terms.iter().all(|(c, _)| *c == 0.0) {
        // Keep the zero operator representable.
        return Ok(PauliSum { terms: Vec::new(), qubit_count: n });
    }
    PauliSum::new(terms)
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(QspError::Parse { line, msg: msg.into() })
}

/// Parse `<sign> <decimal> <string>` or `<signed-decimal> <string>` lines; `#` starts a comment.
pub fn parse_pauli_sum(text: &str) -> Result<PauliSum> {
    let mut terms: Vec<(f64, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (value, string) = match fields.as_slice() {
            [sign @ ("+" | "-"), mag, s] => {
                let m: f64 = mag.parse().or_else(|_| parse_err(line_no, format!("bad coefficient {mag:?}")))?;
                if m.is_sign_negative() || mag.starts_with('+') {
                    return parse_err(line_no, "coefficient after an explicit sign must be unsigned");
                }
                (if *sign == "-" { -m } else { m }, *s)
            }
            [v, s] => {
                let m: f64 = v.parse().or_else(|_| parse_err(line_no, format!("bad coefficient {v:?}")))?;
                (m, *s)
            }
            _ => return parse_err(line_no, format!("expected `<sign> <value> <string>`, got {line:?}")),
        };
        if !value.is_finite() {
            return parse_err(line_no, "coefficient is not finite");
        }
        if let Some(bad) = string.chars().find(|ch| !matches!(ch, 'I' | 'X' | 'Y' | 'Z')) {
            return parse_err(line_no, format!("invalid Pauli letter {bad:?}"));
        }
        if let Some((_, first)) = terms.first() {
            if first.len() != string.len() {
                return parse_err(
                    line_no,
                    format!("string {string} has length {}, expected {}", string.len(), first.len()),
                );
            }
        }
        terms.push((value, string.to_string()));
    }
    if terms.is_empty() {
        return Err(QspError::EmptySum);
    }
    PauliSum::new(terms)
}

pub fn load_pauli_sum(path: &Path) -> Result<PauliSum> {
    let text = fs::read_to_string(path).map_err(|e| QspError::Io(format!("{}: {e}", path.display())))?;
    parse_pauli_sum(&text)
}

/// Unitary whose `<s| U |s>` ancilla block encodes an operator on the system register.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncoding {
    pub unitary: ComplexMatrix,
    pub system_qubits: usize,
    pub ancilla_qubits: usize,
    pub signal_state: usize,
    /// Encoded operator is `H / scale_alpha` before any `beta` rescaling.
    pub scale_alpha: f64,
    pub beta: Option<f64>,
}

impl BlockEncoding {
    pub fn total_qubits(&self) -> usize {
        self.system_qubits + self.ancilla_qubits
    }

    pub fn system_dim(&self) -> usize {
        1 << self.system_qubits
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        is_unitary(&self.unitary, tol)
    }

    /// Trivial encoding `U = I` of the identity with no ancillas.
    pub fn identity(system_qubits: usize) -> Self {
        Self {
            unitary: identity(1 << system_qubits),
            system_qubits,
            ancilla_qubits: 0,
            signal_state: 0,
            scale_alpha: 1.0,
            beta: None,
        }
    }
}

/// The `2^n x 2^n` block `<s| U |s>` on the ancilla register.
pub fn extract_block(enc: &BlockEncoding) -> ComplexMatrix {
    let n = enc.system_dim();
    let start = enc.signal_state * n;
    enc.unitary.view((start, start), (n, n)).into_owned()
}

/// One-ancilla dilation `[[H/a, S], [S, -H/a]]` with `S = sqrt(I - H^2/a^2)`.
pub fn dilation_encoding(h: &ComplexMatrix, alpha: f64) -> Result<BlockEncoding> {
    let dim = h.nrows();
    if !h.is_square() || !dim.is_power_of_two() {
        return Err(QspError::Dimension(format!("{}x{} is not a qubit operator", h.nrows(), h.ncols())));
    }
    let s = hermitian_sqrt_complement(h, alpha)?;
    let a = h.scale(1.0 / alpha);
    let mut u = ComplexMatrix::zeros(2 * dim, 2 * dim);
    u.view_mut((0, 0), (dim, dim)).copy_from(&a);
    u.view_mut((0, dim), (dim, dim)).copy_from(&s);
    u.view_mut((dim, 0), (dim, dim)).copy_from(&s);
    u.view_mut((dim, dim), (dim, dim)).copy_from(&(-a));
    Ok(BlockEncoding {
        unitary: u,
        system_qubits: dim.trailing_zeros() as usize,
        ancilla_qubits: 1,
        signal_state: 0,
        scale_alpha: alpha,
        beta: None,
    })
}

/// Encoding of `A B` from encodings of `A` and `B`, as `(I_B (x) V_A)(V_B (x) I_A)`.
/// The ancillas of `enc_b` sit outside those of `enc_a`.
pub fn product_encoding(enc_a: &BlockEncoding, enc_b: &BlockEncoding) -> Result<BlockEncoding> {
    if enc_a.system_qubits != enc_b.system_qubits {
        return Err(QspError::Dimension(format!(
            "system registers differ: {} vs {} qubits",
            enc_a.system_qubits, enc_b.system_qubits
        )));
    }
    let (aa, ab, n) = (enc_a.ancilla_qubits, enc_b.ancilla_qubits, enc_a.system_qubits);
    let total = aa + ab + n;
    let va = kron(&identity(1 << ab), &enc_a.unitary);
    let targets: Vec<usize> = (0..ab).chain(ab + aa..total).collect();
    let vb = embed(&enc_b.unitary, &targets, total)?;
    Ok(BlockEncoding {
        unitary: va * vb,
        system_qubits: n,
        ancilla_qubits: aa + ab,
        signal_state: (enc_b.signal_state << aa) | enc_a.signal_state,
        scale_alpha: enc_a.scale_alpha * enc_b.scale_alpha,
        beta: None,
    })
}

fn rx(theta: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * theta).sin_cos();
    ComplexMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)])
}

/// `R_x(2 acos beta) (x) U`, which encodes `beta` times the operator of `enc`.
pub fn scale_encoding(enc: &BlockEncoding, beta: f64) -> Result<BlockEncoding> {
    if !(beta > 0.0 && beta <= 1.0) {
        return domain(format!("beta must lie in (0, 1], got {beta}"));
    }
    Ok(BlockEncoding {
        unitary: kron(&rx(2.0 * beta.acos()), &enc.unitary),
        system_qubits: enc.system_qubits,
        ancilla_qubits: enc.ancilla_qubits + 1,
        signal_state: enc.signal_state,
        scale_alpha: enc.scale_alpha,
        beta: Some(beta * enc.beta.unwrap_or(1.0)),
    })
}

/// Encoding of `(I + beta A) / 2`: a Hadamard-conjugated controlled application of the
/// `beta`-scaled encoding of `A`. Adds two ancillas.
pub fn pretransform_encoding(enc: &BlockEncoding, beta: f64) -> Result<BlockEncoding> {
    if !(beta > 0.0 && beta < 1.0) {
        return domain(format!("beta must lie in (0, 1), got {beta}"));
    }
    let scaled = scale_encoding(enc, beta)?;
    let dim = scaled.unitary.nrows();
    let mut ctrl = ComplexMatrix::zeros(2 * dim, 2 * dim);
    ctrl.view_mut((0, 0), (dim, dim)).copy_from(&identity(dim));
    ctrl.view_mut((dim, dim), (dim, dim)).copy_from(&scaled.unitary);
    let h = hadamard_top(dim);
    Ok(BlockEncoding {
        unitary: &h * ctrl * &h,
        system_qubits: enc.system_qubits,
        ancilla_qubits: scaled.ancilla_qubits + 1,
        signal_state: scaled.signal_state,
        scale_alpha: enc.scale_alpha,
        beta: Some(beta),
    })
}

/// `H (x) I_dim`.
pub(crate) fn hadamard_top(dim: usize) -> ComplexMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let h = ComplexMatrix::from_row_slice(2, 2, &[r, r, r, -r].map(|v| C64::new(v, 0.0)));
    kron(&h, &identity(dim))
}

/// Whether the encoded block is hermitian within `tol`.
pub fn encodes_hermitian(enc: &BlockEncoding, tol: f64) -> bool {
    is_hermitian(&extract_block(enc), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{hermitian_eig, max_abs};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn eq33() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(
            4,
            4,
            &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0].map(c),
        )
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let dim = 1 << n;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        (&m + m.adjoint()).scale(0.5)
    }

    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let h = random_hermitian(rng, n);
        crate::numerics::matrix_exp_hermitian(&h, 1.7).unwrap()
    }

    fn h2_path() -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/h2_sto3g_r0.5.pauli")
    }

    #[test]
    fn pauli_matrix_examples() {
        let z = pauli_sum_to_matrix(&PauliSum::new(vec![(1.0, "Z".into())]).unwrap()).unwrap();
        assert_eq!(z, ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]));
        let xx = pauli_sum_to_matrix(&PauliSum::new(vec![(1.0, "XX".into())]).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(xx[(i, j)], c(if i + j == 3 { 1.0 } else { 0.0 }));
            }
        }
        assert!(PauliSum::new(vec![(1.0, "XA".into())]).is_err());
        assert!(PauliSum::new(vec![(1.0, "XX".into()), (1.0, "X".into())]).is_err());
        assert_eq!(PauliSum::new(vec![]), Err(QspError::EmptySum));
    }

    #[test]
    fn heisenberg_examples() {
        let p = heisenberg_hamiltonian(2, &[[0.0; 3]], &[1.0, 1.0]).unwrap();
        assert_eq!(p.terms(), &[(1.0, "ZI".to_string()), (1.0, "IZ".to_string())]);
        let p = heisenberg_hamiltonian(2, &[[1.0, 0.0, 0.0]], &[0.5, 0.5]).unwrap();
        assert_eq!(pauli_sum_to_matrix(&p).unwrap(), eq33());
        assert!(heisenberg_hamiltonian(1, &[], &[1.0]).is_err());
        let p = heisenberg_hamiltonian(4, &[[1.0, 0.5, 0.25]; 3], &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(p.terms().len(), 4 + 9);
        assert_eq!(p.coefficient("IYYI"), 0.5);
    }

    #[test]
    fn heisenberg_commutator_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let m = |s: &str| pauli_sum_to_matrix(&PauliSum::new(vec![(1.0, s.into())]).unwrap()).unwrap();
        for _ in 0..20 {
            let g = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let h1 = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let h2 = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let a = pauli_sum_to_matrix(&heisenberg_hamiltonian(2, &[g], &h1).unwrap()).unwrap();
            let b = pauli_sum_to_matrix(&heisenberg_hamiltonian(2, &[g], &h2).unwrap()).unwrap();
            let comm = &a * &b - &b * &a;
            let (d1, d2) = (h2[0] - h1[0], h2[1] - h1[1]);
            let want =
                (m("YX").scale(g[1] * d2 - g[0] * d1) + m("XY").scale(g[1] * d1 - g[0] * d2)) * C64::new(0.0, 2.0);
            assert!(max_abs(&(comm - want)) < 1e-12);
        }
    }

    #[test]
    fn parse_both_formats() {
        let p = parse_pauli_sum("# comment\n- 0.678523 IIII\n+ 0.5  ZIII  # trailing\n\n-0.25 XXYY\n").unwrap();
        assert_eq!(p.terms(), &[(-0.678523, "IIII".into()), (0.5, "ZIII".into()), (-0.25, "XXYY".into())]);
        assert_eq!(parse_pauli_sum("# only comments\n\n"), Err(QspError::EmptySum));
        assert_eq!(parse_pauli_sum(""), Err(QspError::EmptySum));
        match parse_pauli_sum("+ 1.0 ZZ\n+ abc ZZ\n") {
            Err(QspError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_pauli_sum("+ 1.0 ZZ\n\n# x\n+ 1.0 ZQ\n") {
            Err(QspError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_pauli_sum("+ 1.0 ZZ\n- 1.0 Z\n"), Err(QspError::Parse { line: 2, .. })));
        assert!(matches!(parse_pauli_sum("+ -1.0 ZZ\n"), Err(QspError::Parse { line: 1, .. })));
    }

    #[test]
    fn shipped_h2_hamiltonian() {
        let p = load_pauli_sum(&h2_path()).unwrap();
        assert_eq!(p.terms().len(), 27);
        assert_eq!(p.qubit_count(), 4);
        assert_eq!(p.coefficient("IIII"), -0.678523);
        let m = pauli_sum_to_matrix(&p).unwrap();
        assert!(is_hermitian(&m, 1e-12));
        assert!((m.trace().re + 10.856368).abs() < 1e-12);
        assert!(load_pauli_sum(Path::new("/nonexistent/h2.pauli")).is_err());
    }

    #[test]
    fn dilation_examples() {
        let enc = dilation_encoding(&ComplexMatrix::zeros(2, 2), 1.0).unwrap();
        assert_eq!(extract_block(&enc), ComplexMatrix::zeros(2, 2));
        assert!(max_abs(&(enc.unitary.view((0, 2), (2, 2)) - identity(2))) < 1e-15);
        let z = pauli('Z').unwrap();
        let enc = dilation_encoding(&z, 1.0).unwrap();
        assert_eq!(extract_block(&enc), z);
        assert!(max_abs(&enc.unitary.view((0, 2), (2, 2)).into_owned()) < 1e-15);
        let enc = dilation_encoding(&eq33(), 1.5).unwrap();
        assert!(enc.is_unitary(1e-10));
        assert!(max_abs(&(extract_block(&enc) - eq33().scale(1.0 / 1.5))) < 1e-10);
        assert!(dilation_encoding(&eq33(), 1.0).is_err());
    }

    #[test]
    fn scale_examples() {
        let base = dilation_encoding(&eq33(), 1.5).unwrap();
        let same = scale_encoding(&base, 1.0).unwrap();
        assert!(max_abs(&(extract_block(&same) - extract_block(&base))) < 1e-15);
        let id = scale_encoding(&BlockEncoding::identity(1), 0.4).unwrap();
        assert!(max_abs(&(extract_block(&id) - identity(2).scale(0.4))) < 1e-15);
        let s = scale_encoding(&base, 0.4).unwrap();
        assert_eq!(s.ancilla_qubits, 2);
        assert!(max_abs(&(extract_block(&s) - eq33().scale(0.4 / 1.5))) < 1e-10);
        assert!(scale_encoding(&base, 0.0).is_err());
        assert!(scale_encoding(&base, 1.1).is_err());
    }

    #[test]
    fn pretransform_examples() {
        let zero = dilation_encoding(&ComplexMatrix::zeros(4, 4), 1.0).unwrap();
        let p = pretransform_encoding(&zero, 0.4).unwrap();
        assert!(max_abs(&(extract_block(&p) - identity(4).scale(0.5))) < 1e-15);
        let z = dilation_encoding(&pauli('Z').unwrap(), 1.0).unwrap();
        let p = pretransform_encoding(&z, 0.4).unwrap();
        assert!((extract_block(&p)[(0, 0)].re - 0.7).abs() < 1e-15);
        let enc = dilation_encoding(&eq33(), 1.5).unwrap();
        let p = pretransform_encoding(&enc, 0.4).unwrap();
        assert_eq!(p.ancilla_qubits, 3);
        assert!(p.is_unitary(1e-10));
        let (vals, _) = hermitian_eig(&extract_block(&p)).unwrap();
        let s2 = 2f64.sqrt();
        for (v, l) in vals.iter().zip([-s2, -1.0, 1.0, s2]) {
            assert!((v - 0.5 * (1.0 + 0.4 * l / 1.5)).abs() < 1e-10);
        }
        assert!(pretransform_encoding(&enc, 1.0).is_err());
    }

    #[test]
    fn product_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 2);
        let ea = dilation_encoding(&a, 4.0).unwrap();
        let eb = dilation_encoding(&b, 4.0).unwrap();
        let p = product_encoding(&ea, &eb).unwrap();
        assert!(p.is_unitary(1e-10));
        let want = a.scale(0.25) * b.scale(0.25);
        assert!(max_abs(&(extract_block(&p) - want)) < 1e-10);
        let with_id = product_encoding(&ea, &BlockEncoding::identity(2)).unwrap();
        assert!(max_abs(&(extract_block(&with_id) - a.scale(0.25))) < 1e-15);
        let da = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.3), c(-0.5)]));
        let db = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.8), c(0.6)]));
        let p = product_encoding(&dilation_encoding(&da, 1.0).unwrap(), &dilation_encoding(&db, 1.0).unwrap()).unwrap();
        assert!(max_abs(&(extract_block(&p) - &da * &db)) < 1e-15);
        assert!(product_encoding(&ea, &BlockEncoding::identity(1)).is_err());
    }

    #[test]
    fn product_with_nonzero_signal_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_unitary(&mut rng, 3);
        let v = random_unitary(&mut rng, 3);
        let ea = BlockEncoding {
            unitary: u.clone(),
            system_qubits: 1,
            ancilla_qubits: 2,
            signal_state: 2,
            scale_alpha: 1.0,
            beta: None,
        };
        let eb = BlockEncoding {
            unitary: v.clone(),
            system_qubits: 1,
            ancilla_qubits: 2,
            signal_state: 1,
            scale_alpha: 1.0,
            beta: None,
        };
        let p = product_encoding(&ea, &eb).unwrap();
        let want = extract_block(&ea) * extract_block(&eb);
        assert!(max_abs(&(extract_block(&p) - want)) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn round_trips(seed in any::<u64>(), n in 2usize..=3, beta in 0.05f64..0.95) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(&mut rng, n);
            let alpha = crate::numerics::spectral_norm(&h) * rng.random_range(1.0..2.0);
            let enc = dilation_encoding(&h, alpha).unwrap();
            prop_assert!(enc.is_unitary(1e-10));
            let a = h.scale(1.0 / alpha);
            prop_assert!(max_abs(&(extract_block(&enc) - &a)) < 1e-10);
            for b in [0.25, 0.4, 0.5, 1.0, beta] {
                let s = scale_encoding(&enc, b).unwrap();
                prop_assert!(s.is_unitary(1e-10));
                prop_assert!(max_abs(&(extract_block(&s) - a.scale(b))) < 1e-10);
            }
            let p = pretransform_encoding(&enc, beta).unwrap();
            prop_assert!(p.is_unitary(1e-10));
            let want = (identity(1 << n) + a.scale(beta)).scale(0.5);
            prop_assert!(max_abs(&(extract_block(&p) - want)) < 1e-10);
            let (vals, _) = hermitian_eig(&extract_block(&p)).unwrap();
            prop_assert!(vals[0] >= (1.0 - beta) / 2.0 - 1e-10);
            prop_assert!(vals[vals.len() - 1] <= (1.0 + beta) / 2.0 + 1e-10);
            let h2 = random_hermitian(&mut rng, n);
            let alpha2 = crate::numerics::spectral_norm(&h2) * 1.3;
            let e2 = dilation_encoding(&h2, alpha2).unwrap();
            let pr = product_encoding(&enc, &e2).unwrap();
            prop_assert!(pr.is_unitary(1e-10));
            prop_assert!(max_abs(&(extract_block(&pr) - &a * h2.scale(1.0 / alpha2))) < 1e-10);
        }
    }
}
