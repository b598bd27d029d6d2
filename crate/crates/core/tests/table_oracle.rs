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

//! Independent oracle for the pair weights: solve for the six weights that
//! reproduce the analytic decay factors as a linear least-squares problem.

use nalgebra::{DMatrix, DVector};
use qnp::dephase::{decay_factor_index, pair_operators, DephasingParams, PairWeights, TableVariant};

fn solve_weights(params: &DephasingParams) -> (Vec<f64>, f64) {
    let ops = pair_operators();
    let diag: Vec<Vec<_>> = ops.iter().map(|u| u.matrix().diagonal()).collect();
    // Each unitary is diagonal, so element (k, l) picks up sum_m p_m u_m(k) conj(u_m(l)).
    let mut a = DMatrix::<f64>::zeros(32, 6);
    let mut b = DVector::<f64>::zeros(32);
    for k in 0..4 {
        for l in 0..4 {
            let row = 2 * (4 * k + l);
            for (m, d) in diag.iter().enumerate() {
                let z = d[k] * d[l].conj();
                a[(row, m)] = z.re;
                a[(row + 1, m)] = z.im;
            }
            b[row] = decay_factor_index(k, l, params);
        }
    }
    let svd = a.clone().svd(true, true);
    let p = svd.solve(&b, 1e-12).unwrap();
    let resid = (&a * &p - &b).norm();
    (p.iter().copied().collect(), resid)
}

#[test]
fn corrected_weights_are_the_exact_solution() {
    for &g1 in &[0.3, 1.0 / 2.1, 2.0] {
        for &g2 in &[1.0 / 0.24, 0.9] {
            for &c in &[0.0, 0.25, 0.6, 1.0] {
                for &t in &[0.0, 0.01, 0.1, 0.32, 1.0] {
                    let params = DephasingParams::two_qubit(g1, g2, c, t).unwrap();
                    let (p, resid) = solve_weights(&params);
                    assert!(resid < 1e-12, "no exact representation: {resid:e}");
                    let w = PairWeights::new(&params, TableVariant::Corrected).unwrap().as_array();
                    for (a, b) in p.iter().zip(w) {
                        assert!((a - b).abs() < 1e-10, "g=({g1},{g2}) c={c} t={t}: {p:?} vs {w:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn as_printed_weights_are_not_a_solution() {
    let params = DephasingParams::two_qubit(1.0 / 2.1, 1.0 / 0.24, 0.8, 0.2).unwrap();
    let (p, _) = solve_weights(&params);
    let w = PairWeights::new(&params, TableVariant::AsPrinted).unwrap().as_array();
    let worst = p.iter().zip(w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst > 1e-3);
}

#[test]
fn system_has_full_column_rank() {
    let ops = pair_operators();
    let diag: Vec<Vec<_>> = ops.iter().map(|u| u.matrix().diagonal()).collect();
    let mut a = DMatrix::<f64>::zeros(32, 6);
    for k in 0..4 {
        for l in 0..4 {
            for (m, d) in diag.iter().enumerate() {
                let z = d[k] * d[l].conj();
                a[(2 * (4 * k + l), m)] = z.re;
                a[(2 * (4 * k + l) + 1, m)] = z.im;
            }
        }
    }
    assert_eq!(a.rank(1e-10), 6);
}
