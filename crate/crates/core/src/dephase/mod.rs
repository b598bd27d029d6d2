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

//! Correlated Gaussian dephasing.
//!
//! Each qubit `i` picks up a random z-phase `alpha_i`; the phases are jointly
//! Gaussian with covariance `Sigma_ij = c_ij t sqrt(g_i g_j) / 2`. Averaging
//! `exp(-i alpha.Z) rho exp(i alpha.Z)` multiplies the element `|k><l|` by
//!
//! ```text
//! exp( - sum_i [k_i != l_i] g_i t  -  sum_{i<j} 2 c_ij t eta_i eta_j sqrt(g_i g_j) )
//! ```
//!
//! with `eta_i = ((-1)^k_i - (-1)^l_i) / 2`. Single-spin coherences decay as
//! `exp(-g t)`, double-quantum coherences faster and zero-quantum ones slower
//! when `c > 0`.
//!
//! Three representations of the same channel live here: the closed form
//! ([`analytic_dephase`]), a sampled average ([`monte_carlo_dephase`]) and
//! the engineered unitary mixtures of [`kraus`].

pub mod kraus;
pub mod monte_carlo;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::opcore::{bit, DensityMatrix};

pub use kraus::{
    apply_mixture, engineered_pair, engineered_three_qubit, kraus_three_qubit, kraus_two_qubit,
    pair_operators, third_qubit_flip_probability, PairWeights, TableVariant, UnitaryCombination,
    WeightedUnitaryMixture,
};
pub use monte_carlo::{
    monte_carlo_dephase, monte_carlo_dephase_with, monte_carlo_phase_average, GaussianSampler,
    PhaseAverage,
};

/// Symmetric matrix of correlation factors, unit diagonal, entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn independent(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::independent(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &c) in row.iter().enumerate() {
                if i == j {
                    if (c - 1.0).abs() > 1e-12 {
                        return Err(Error::InvalidParameter(format!(
                            "correlation diagonal c_{i}{i} = {c}, expected 1"
                        )));
                    }
                } else if (c - rows[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "correlation matrix not symmetric at ({i},{j})"
                    )));
                } else {
                    m = m.with(i, j, c)?;
                }
            }
        }
        Ok(m)
    }

    /// Sets `c_ij = c_ji = c`.
    pub fn with(mut self, i: usize, j: usize, c: f64) -> Result<Self> {
        if i >= self.n || j >= self.n || i == j {
            return Err(Error::InvalidParameter(format!(
                "correlation index pair ({i},{j}) invalid for {} qubits",
                self.n
            )));
        }
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter(format!(
                "correlation factor c_{i}{j} = {c} outside [0, 1]"
            )));
        }
        self.data[i * self.n + j] = c;
        self.data[j * self.n + i] = c;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Relaxation rates and correlations, without a duration.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingModel {
    gamma: Vec<f64>,
    corr: CorrelationMatrix,
}

impl DephasingModel {
    pub fn new(gamma: Vec<f64>, corr: CorrelationMatrix) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::InvalidParameter("need at least one qubit".into()));
        }
        if gamma.len() != corr.n() {
            return Err(Error::DimensionMismatch {
                expected: gamma.len(),
                found: corr.n(),
            });
        }
        if let Some(g) = gamma.iter().find(|g| !g.is_finite() || **g < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "relaxation rate {g} must be finite and >= 0"
            )));
        }
        let model = Self { gamma, corr };
        let min = model.min_covariance_eigenvalue();
        if min < -1e-12 {
            return Err(Error::NotPositiveSemidefinite(min));
        }
        Ok(model)
    }

    /// Two qubits with correlation `c`.
    pub fn pair(gamma1: f64, gamma2: f64, c: f64) -> Result<Self> {
        Self::new(
            vec![gamma1, gamma2],
            CorrelationMatrix::independent(2).with(0, 1, c)?,
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn corr(&self) -> &CorrelationMatrix {
        &self.corr
    }

    pub fn at(&self, t: f64) -> Result<DephasingParams> {
        DephasingParams::from_model(self.clone(), t)
    }

    /// Phase covariance, row-major, for duration `t`.
    pub fn covariance(&self, t: f64) -> Vec<f64> {
        let n = self.n_qubits();
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                cov[i * n + j] = self.corr.get(i, j) * t * (self.gamma[i] * self.gamma[j]).sqrt() / 2.0;
            }
        }
        cov
    }

    fn min_covariance_eigenvalue(&self) -> f64 {
        let n = self.n_qubits();
        let cov = self.covariance(1.0);
        let m = DMatrix::from_row_slice(n, n, &cov);
        SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// A dephasing channel: rates, correlations and duration.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingParams {
    model: DephasingModel,
    t: f64,
}

impl DephasingParams {
    pub fn new(gamma: Vec<f64>, corr: CorrelationMatrix, t: f64) -> Result<Self> {
        Self::from_model(DephasingModel::new(gamma, corr)?, t)
    }

    pub fn from_model(model: DephasingModel, t: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "duration {t} must be finite and >= 0"
            )));
        }
        Ok(Self { model, t })
    }

    pub fn two_qubit(gamma1: f64, gamma2: f64, c: f64, t: f64) -> Result<Self> {
        Self::from_model(DephasingModel::pair(gamma1, gamma2, c)?, t)
    }

    pub fn model(&self) -> &DephasingModel {
        &self.model
    }

    pub fn n_qubits(&self) -> usize {
        self.model.n_qubits()
    }

    pub fn gamma(&self) -> &[f64] {
        self.model.gamma()
    }

    pub fn corr(&self) -> &CorrelationMatrix {
        self.model.corr()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn covariance(&self) -> Vec<f64> {
        self.model.covariance(self.t)
    }
}

/// Per-qubit `eta_i = ((-1)^k_i - (-1)^l_i) / 2` for the element `|k><l|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaVector(Vec<i8>);

impl EtaVector {
    pub fn from_bits(k: &[u8], l: &[u8]) -> Result<Self> {
        if k.len() != l.len() {
            return Err(Error::DimensionMismatch {
                expected: k.len(),
                found: l.len(),
            });
        }
        if let Some(b) = k.iter().chain(l).find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Self(
            k.iter()
                .zip(l)
                .map(|(&a, &b)| (b as i8) - (a as i8))
                .collect(),
        ))
    }

    pub fn from_indices(k: usize, l: usize, n_qubits: usize) -> Self {
        Self(
            (0..n_qubits)
                .map(|q| bit(l, q, n_qubits) as i8 - bit(k, q, n_qubits) as i8)
                .collect(),
        )
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    /// Sum of the entries: 0 for zero-quantum, +-2 for two-spin double-quantum.
    pub fn coherence_order(&self) -> i32 {
        self.0.iter().map(|&e| e as i32).sum()
    }
}

fn exponent_of(eta: &EtaVector, params: &DephasingParams) -> f64 {
    let g = params.gamma();
    let t = params.t();
    let eta = eta.values();
    let mut e = 0.0;
    for i in 0..eta.len() {
        if eta[i] != 0 {
            e -= g[i] * t;
        }
        for j in i + 1..eta.len() {
            let s = (eta[i] * eta[j]) as f64;
            if s != 0.0 {
                e -= 2.0 * params.corr().get(i, j) * t * s * (g[i] * g[j]).sqrt();
            }
        }
    }
    e
}

/// Natural log of the decay factor of basis element `(k, l)`.
pub fn decay_exponent(k: usize, l: usize, params: &DephasingParams) -> f64 {
    exponent_of(&EtaVector::from_indices(k, l, params.n_qubits()), params)
}

/// Decay factor of `|k><l|` with `k`, `l` given as bit strings (qubit 0 first).
pub fn decay_factor(k: &[u8], l: &[u8], params: &DephasingParams) -> Result<f64> {
    let eta = EtaVector::from_bits(k, l)?;
    if eta.values().len() != params.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: params.n_qubits(),
            found: eta.values().len(),
        });
    }
    Ok(exponent_of(&eta, params).exp())
}

/// Decay factor for basis indices.
pub fn decay_factor_index(k: usize, l: usize, params: &DephasingParams) -> f64 {
    decay_exponent(k, l, params).exp()
}

/// Exact average of the Gaussian phase channel.
pub fn analytic_dephase(rho: &DensityMatrix, params: &DephasingParams) -> Result<DensityMatrix> {
    rho.check_qubits(params.n_qubits())?;
    Ok(rho.with_matrix(
        rho.matrix()
            .map_entries(|k, l, z| if k == l { z } else { z * decay_factor_index(k, l, params) }),
    ))
}
