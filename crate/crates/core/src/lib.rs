// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Classical simulation of quantum signal processing for Hamiltonian simulation.

pub mod algorithms;
pub mod complexity;
pub mod encoding;
pub mod error;
pub mod format;
pub mod numerics;
pub mod polyapprox;
pub mod qsp;

pub use algorithms::{SimulationOutcome, TimeDependentSpec};
pub use encoding::{BlockEncoding, PauliSum};
pub use error::{QspError, Result};
pub use numerics::{ComplexMatrix, Statevector, C64};
pub use polyapprox::{ChebyshevPolynomial, Interval, Parity};
pub use qsp::{Basis, Convention, PhaseVector};
