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

#![allow(dead_code)]

use qnp::opcore::{ComplexMatrix, DensityMatrix, C64};

/// `A A^dagger / tr` from `2 d^2` real entries.
pub fn density_from(n_qubits: usize, raw: &[f64]) -> DensityMatrix {
    let d = 1usize << n_qubits;
    assert_eq!(raw.len(), 2 * d * d);
    let a = ComplexMatrix::from_vec(d, raw.chunks(2).map(|z| C64::new(z[0], z[1])).collect()).unwrap();
    let m = a.matmul(&a.adjoint()).unwrap();
    let tr = m.trace().re;
    let mut m = m.scale(C64::new(1.0 / tr, 0.0));
    // Exact Hermiticity so the constructor's check is not sensitive to rounding.
    for r in 0..d {
        m[(r, r)] = C64::new(m[(r, r)].re, 0.0);
        for c in r + 1..d {
            m[(c, r)] = m[(r, c)].conj();
        }
    }
    DensityMatrix::new(m).unwrap()
}

/// Deterministic pseudo-random states from a simple LCG.
pub fn states(n_qubits: usize, count: usize, seed: u64) -> Vec<DensityMatrix> {
    let d = 1usize << n_qubits;
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..count)
        .map(|_| {
            let raw: Vec<f64> = (0..2 * d * d)
                .map(|_| {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect();
            density_from(n_qubits, &raw)
        })
        .collect()
}

pub const TABLE_GAMMA: [f64; 3] = [1.0 / 2.1, 1.0 / 0.24, 1.0 / 1.2];
