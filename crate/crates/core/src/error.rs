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

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits} qubit(s)")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("qubit index {0} used more than once")]
    RepeatedQubit(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("trace is {found}, expected {expected}")]
    BadTrace { expected: f64, found: f64 },
    #[error("state has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("expectation value has imaginary residue {0:e}")]
    ComplexExpectation(f64),
    #[error("partial trace needs at least one kept qubit")]
    EmptyKeepSet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("covariance matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
    #[error("weight of term {index} is {value:e}; the terms do not form a convex mixture")]
    NegativeWeight { index: usize, value: f64 },
    #[error("mixture weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("ancilla qubits are not in |00> (leakage {0:e})")]
    AncillaNotReset(f64),
    #[error("sample count must be at least 1")]
    ZeroSamples,
    #[error("curve has no points")]
    EmptyCurve,
    #[error("curve times must be strictly increasing and values finite")]
    MalformedCurve,
    #[error("degenerate fit weights: {0}")]
    DegenerateWeights(String),
    #[error("expected {expected} relaxation rates for this method, got {found}")]
    RateCount { expected: usize, found: usize },
    #[error("curve does not constrain the correlation factor: {0}")]
    DegenerateCurve(String),
    #[error("optimizer failed: {0}")]
    Optimizer(String),
    #[error("bootstrap needs at least {min} replicas, got {found}")]
    TooFewReplicas { min: usize, found: usize },
}
