// Copyright 2026 The qnp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Correlated dephasing noise on small spin registers.
//!
//! The crate is organised bottom-up:
//!
//! * [`opcore`] dense complex matrices, density matrices and the gate library;
//! * [`dephase`] the Gaussian correlated-dephasing channel (analytic, Monte
//!   Carlo and engineered unitary-mixture forms);
//! * [`qec3`] the three-qubit phase-flip code and entanglement fidelity;
//! * [`nmrsim`] weak-coupling spin Hamiltonian evolution, echoes and the
//!   double-quantum decay experiment;
//! * [`estimate`] decay curves, measurement noise and correlation fitting.
//!
//! Parallel loops go through [`exec::Execution`]; with the `parallel` feature
//! disabled every loop runs sequentially and produces the same bits.

pub mod curve;
pub mod dephase;
pub mod error;
pub mod estimate;
pub mod exec;
pub mod nmrsim;
pub mod opcore;
pub mod qec3;

pub use curve::{CurveMeta, CurvePoint, DecayCurve, Method, TimeGrid};
pub use error::{Error, Result};
pub use exec::Execution;
