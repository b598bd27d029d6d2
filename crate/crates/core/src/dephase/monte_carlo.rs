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

//! Sampled realisation of the Gaussian phase channel.
//!
//! Samples are grouped in fixed-size batches; batch `b` draws from ChaCha
//! stream `b` of the user seed. Batch sums are combined in batch order, so
//! the estimate is bit-identical for any thread count.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::DephasingParams;
use crate::error::{Error, Result};
use crate::exec::{substream, Execution};
use crate::opcore::{bit, DensityMatrix, C64};

const BATCH: usize = 2048;

/// Draws zero-mean Gaussian vectors with covariance `F F^T`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    n: usize,
    factor: Vec<f64>,
}

impl GaussianSampler {
    /// Cholesky factor of `cov` (row-major, `n x n`); for PSD but singular
    /// covariances falls back to `V sqrt(max(lambda, 0))`.
    pub fn new(cov: &[f64], n: usize) -> Result<Self> {
        if cov.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: cov.len(),
            });
        }
        let m = DMatrix::from_row_slice(n, n, cov);
        if let Some(ch) = m.clone().cholesky() {
            let l = ch.l();
            return Ok(Self {
                n,
                factor: (0..n * n).map(|i| l[(i / n, i % n)]).collect(),
            });
        }
        let eig = SymmetricEigen::new(m);
        let mut factor = vec![0.0; n * n];
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda < -1e-12 {
                return Err(Error::NotPositiveSemidefinite(lambda));
            }
            let s = lambda.max(0.0).sqrt();
            for i in 0..n {
                factor[i * n + k] = eig.eigenvectors[(i, k)] * s;
            }
        }
        Ok(Self { n, factor })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let z: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            *o = (0..self.n).map(|k| self.factor[i * self.n + k] * z[k]).sum();
        }
    }
}

/// Sample mean of `exp(-i (phi_k - phi_l))` over every element `(k, l)`,
/// where `phi_k = sum_i alpha_i z_i(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAverage {
    n_qubits: usize,
    n_samples: usize,
    mean: Vec<C64>,
    std_err: Vec<f64>,
}

impl PhaseAverage {
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn factor(&self, k: usize, l: usize) -> C64 {
        self.mean[k * (1 << self.n_qubits) + l]
    }

    /// Standard error of the real part of [`PhaseAverage::factor`].
    pub fn std_err(&self, k: usize, l: usize) -> f64 {
        self.std_err[k * (1 << self.n_qubits) + l]
    }
}

struct BatchSums {
    sum: Vec<C64>,
    sum_sq_re: Vec<f64>,
}

pub fn monte_carlo_phase_average(
    params: &DephasingParams,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<PhaseAverage> {
    if n_samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let n = params.n_qubits();
    let dim = 1usize << n;
    let sampler = GaussianSampler::new(&params.covariance(), n)?;
    let signs: Vec<Vec<f64>> = (0..dim)
        .map(|k| (0..n).map(|q| 1.0 - 2.0 * bit(k, q, n) as f64).collect())
        .collect();

    let n_batches = n_samples.div_ceil(BATCH);
    let batches = exec.map(n_batches, |b| {
        let mut rng = substream(seed, b as u64);
        let count = BATCH.min(n_samples - b * BATCH);
        let mut sums = BatchSums {
            sum: vec![C64::new(0.0, 0.0); dim * dim],
            sum_sq_re: vec![0.0; dim * dim],
        };
        let mut alpha = vec![0.0; n];
        let mut d = vec![C64::new(0.0, 0.0); dim];
        for _ in 0..count {
            sampler.sample(&mut rng, &mut alpha);
            for (k, dk) in d.iter_mut().enumerate() {
                let phi: f64 = signs[k].iter().zip(&alpha).map(|(s, a)| s * a).sum();
                *dk = C64::from_polar(1.0, -phi);
            }
            for k in 0..dim {
                for l in 0..dim {
                    let z = d[k] * d[l].conj();
                    sums.sum[k * dim + l] += z;
                    sums.sum_sq_re[k * dim + l] += z.re * z.re;
                }
            }
        }
        sums
    });

    let mut sum = vec![C64::new(0.0, 0.0); dim * dim];
    let mut sum_sq = vec![0.0; dim * dim];
    for b in &batches {
        for i in 0..dim * dim {
            sum[i] += b.sum[i];
            sum_sq[i] += b.sum_sq_re[i];
        }
    }
    let nf = n_samples as f64;
    let mean: Vec<C64> = sum.iter().map(|s| s / nf).collect();
    let std_err = mean
        .iter()
        .zip(&sum_sq)
        .map(|(m, &sq)| {
            let var = (sq / nf - m.re * m.re).max(0.0);
            (var / nf).sqrt()
        })
        .collect();
    Ok(PhaseAverage {
        n_qubits: n,
        n_samples,
        mean,
        std_err,
    })
}

pub fn monte_carlo_dephase(
    rho: &DensityMatrix,
    params: &DephasingParams,
    n_samples: usize,
    seed: u64,
) -> Result<DensityMatrix> {
    monte_carlo_dephase_with(rho, params, n_samples, seed, Execution::default())
}

pub fn monte_carlo_dephase_with(
    rho: &DensityMatrix,
    params: &DephasingParams,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<DensityMatrix> {
    rho.check_qubits(params.n_qubits())?;
    let avg = monte_carlo_phase_average(params, n_samples, seed, exec)?;
    Ok(rho.with_matrix(rho.matrix().map_entries(|k, l, z| z * avg.factor(k, l))))
}
