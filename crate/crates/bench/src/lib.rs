// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Criterion benchmarks for qspsim; see `benches/`.
