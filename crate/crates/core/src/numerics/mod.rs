// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Special functions, Chebyshev-basis arithmetic and dense complex linear algebra.

pub mod chebyshev;
pub mod linalg;
pub mod special;

pub use chebyshev::{chebyshev_eval, chebyshev_from_samples, chebyshev_integrate, chebyshev_multiply, clenshaw};
pub use linalg::{
    embed, hermitian_eig, hermitian_function, hermitian_sqrt_complement, identity, is_hermitian, is_unitary, kron,
    matrix_exp_hermitian, max_abs, pauli, spectral_norm, ComplexMatrix, Statevector, C64,
};
pub use special::{bessel_i, bessel_i_scaled, bessel_j, erf, lambert_w};
