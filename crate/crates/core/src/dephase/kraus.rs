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

//! Engineered noise: the dephasing channel as a weighted sum of diagonal
//! unitaries, one experiment per term.
//!
//! For a correlated pair with `a_i = exp(-g_i t)` and `x = 2 c t sqrt(g1 g2)`
//! the six operators `{I, Z1, Z2, Z1Z2, exp(-i pi/4 (Z1+Z2)), exp(+i pi/4 (Z1+Z2))}`
//! reproduce the channel with weights
//!
//! ```text
//! p_I    = (1 + a1 + a2 + a1 a2 e^-x) / 4
//! p_Z1   = (1 - a1 + a2 - a1 a2 e^+x) / 4
//! p_Z2   = (1 + a1 - a2 - a1 a2 e^+x) / 4
//! p_Z1Z2 = (1 - a1 - a2 + a1 a2 e^-x) / 4
//! p_rot  = a1 a2 sinh(x) / 2            (each rotation)
//! ```
//!
//! These follow from matching the five distinct decay factors (population,
//! two single-quantum, double- and zero-quantum); the two rotations
//! contribute `+1` on zero-quantum, `-1` on double-quantum and cancel on
//! single-quantum elements. The widely reproduced table carries `e^-x` in
//! `p_Z1` and `p_Z2`; those weights sum to `1 + a1 a2 sinh(x)` and are kept
//! as [`TableVariant::AsPrinted`] only to demonstrate the defect.
//!
//! The weights are signed in general (`p_Z1Z2 ~ -x/4` for small `t`), so the
//! engineered sum is a [`UnitaryCombination`]; it becomes a convex
//! [`WeightedUnitaryMixture`] only where every weight is non-negative.

use std::f64::consts::FRAC_PI_4;

use super::DephasingParams;
use crate::error::{Error, Result};
use crate::opcore::{apply, bit, pauli, DensityMatrix, Pauli, UnitaryOp};

/// Which weight formulas to use for the correlated pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableVariant {
    #[default]
    Corrected,
    /// Transcribed weights; not trace preserving for `c > 0`.
    AsPrinted,
}

/// Weights of the six pair operators, in the order of [`pair_operators`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairWeights {
    pub identity: f64,
    pub z_first: f64,
    pub z_second: f64,
    pub z_both: f64,
    /// Weight of each of the two collective rotations.
    pub rotation: f64,
}

impl PairWeights {
    pub fn from_rates(gamma1: f64, gamma2: f64, c: f64, t: f64, variant: TableVariant) -> Self {
        let a1 = (-gamma1 * t).exp();
        let a2 = (-gamma2 * t).exp();
        let x = 2.0 * c * t * (gamma1 * gamma2).sqrt();
        let dq = a1 * a2 * (-x).exp();
        let single = match variant {
            TableVariant::Corrected => a1 * a2 * x.exp(),
            TableVariant::AsPrinted => dq,
        };
        Self {
            identity: 0.25 * (1.0 + a1 + a2 + dq),
            z_first: 0.25 * (1.0 - a1 + a2 - single),
            z_second: 0.25 * (1.0 + a1 - a2 - single),
            z_both: 0.25 * (1.0 - a1 - a2 + dq),
            rotation: 0.5 * a1 * a2 * x.sinh(),
        }
    }

    pub fn new(params: &DephasingParams, variant: TableVariant) -> Result<Self> {
        if params.n_qubits() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: params.n_qubits(),
            });
        }
        let g = params.gamma();
        Ok(Self::from_rates(
            g[0],
            g[1],
            params.corr().get(0, 1),
            params.t(),
            variant,
        ))
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.identity,
            self.z_first,
            self.z_second,
            self.z_both,
            self.rotation,
            self.rotation,
        ]
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

/// `I, Z0, Z1, Z0Z1, exp(-i pi/4 (Z0+Z1)), exp(+i pi/4 (Z0+Z1))` on two qubits.
pub fn pair_operators() -> [UnitaryOp; 6] {
    let collective = |sign: f64| {
        let phases: Vec<f64> = (0..4)
            .map(|k| {
                let z0 = 1.0 - 2.0 * bit(k, 0, 2) as f64;
                let z1 = 1.0 - 2.0 * bit(k, 1, 2) as f64;
                sign * FRAC_PI_4 * (z0 + z1)
            })
            .collect();
        UnitaryOp::from_phases(&phases).expect("diagonal phases are unitary")
    };
    let z0 = pauli(Pauli::Z, 0, 2).expect("in range");
    let z1 = pauli(Pauli::Z, 1, 2).expect("in range");
    let zz = z0.then_after(&z1).expect("same size");
    [UnitaryOp::identity(2), z0, z1, zz, collective(1.0), collective(-1.0)]
}

/// Signed linear combination `sum_i w_i U_i rho U_i^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryCombination {
    n_qubits: usize,
    terms: Vec<(f64, UnitaryOp)>,
}

impl UnitaryCombination {
    pub fn new(terms: Vec<(f64, UnitaryOp)>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidParameter("empty operator combination".into()));
        };
        let n_qubits = first.1.n_qubits();
        if let Some((_, u)) = terms.iter().find(|(_, u)| u.n_qubits() != n_qubits) {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                found: 1 << u.n_qubits(),
            });
        }
        if terms.iter().any(|(w, _)| !w.is_finite()) {
            return Err(Error::InvalidParameter("non-finite weight".into()));
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, UnitaryOp)] {
        &self.terms
    }

    pub fn weights(&self) -> Vec<f64> {
        self.terms.iter().map(|(w, _)| *w).collect()
    }

    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w).sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.terms.iter().map(|(w, _)| *w).fold(f64::INFINITY, f64::min)
    }

    /// Every weight at least `-floor`.
    pub fn is_convex(&self, floor: f64) -> bool {
        self.min_weight() >= -floor
    }

    /// Runs every term and adds the results with their weights.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        rho.check_qubits(self.n_qubits)?;
        let mut acc: Option<crate::opcore::ComplexMatrix> = None;
        for (w, u) in &self.terms {
            let term = apply(rho, u)?.into_matrix().scale((*w).into());
            acc = Some(match acc {
                None => term,
                Some(a) => &a + &term,
            });
        }
        Ok(rho.with_matrix(acc.expect("non-empty")))
    }
}

/// Convex mixture of unitaries: weights non-negative, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedUnitaryMixture(UnitaryCombination);

impl WeightedUnitaryMixture {
    /// Weights in `[-1e-12, 0)` are clamped to zero; anything lower is an error.
    pub fn new(terms: Vec<(f64, UnitaryOp)>) -> Result<Self> {
        UnitaryCombination::new(terms)?.try_into()
    }

    pub fn terms(&self) -> &[(f64, UnitaryOp)] {
        self.0.terms()
    }

    pub fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    pub fn as_combination(&self) -> &UnitaryCombination {
        &self.0
    }
}

impl TryFrom<UnitaryCombination> for WeightedUnitaryMixture {
    type Error = Error;
    fn try_from(mut combo: UnitaryCombination) -> Result<Self> {
        for (index, (w, _)) in combo.terms.iter_mut().enumerate() {
            if *w < -1e-12 {
                return Err(Error::NegativeWeight { index, value: *w });
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum = combo.weight_sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::WeightSum(sum));
        }
        Ok(Self(combo))
    }
}

pub fn apply_mixture(rho: &DensityMatrix, mix: &WeightedUnitaryMixture) -> Result<DensityMatrix> {
    mix.0.apply(rho)
}

/// Six-experiment engineered noise for a correlated pair.
pub fn engineered_pair(params: &DephasingParams, variant: TableVariant) -> Result<UnitaryCombination> {
    let w = PairWeights::new(params, variant)?;
    UnitaryCombination::new(w.as_array().into_iter().zip(pair_operators()).collect())
}

/// Pair weights as a convex mixture; fails where any weight is negative.
pub fn kraus_two_qubit(params: &DephasingParams) -> Result<WeightedUnitaryMixture> {
    engineered_pair(params, TableVariant::Corrected)?.try_into()
}

/// Phase-flip probability of an uncorrelated qubit, `(1 - exp(-g t)) / 2`.
pub fn third_qubit_flip_probability(gamma3: f64, t: f64) -> f64 {
    0.5 * (1.0 - (-gamma3 * t).exp())
}

/// Twelve-experiment engineered noise: the pair terms on qubits 0 and 1,
/// each with and without `Z` on an uncorrelated qubit 2.
pub fn engineered_three_qubit(
    pair: &DephasingParams,
    gamma3: f64,
    variant: TableVariant,
) -> Result<UnitaryCombination> {
    if !gamma3.is_finite() || gamma3 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "relaxation rate {gamma3} must be finite and >= 0"
        )));
    }
    let w = PairWeights::new(pair, variant)?;
    let q = third_qubit_flip_probability(gamma3, pair.t());
    let id = UnitaryOp::identity(1);
    let z = pauli(Pauli::Z, 0, 1)?;
    let ops = pair_operators();
    let mut terms = Vec::with_capacity(12);
    for (wi, u) in w.as_array().iter().zip(&ops) {
        terms.push(((1.0 - q) * wi, u.tensor(&id)));
    }
    for (wi, u) in w.as_array().iter().zip(&ops) {
        terms.push((q * wi, u.tensor(&z)));
    }
    UnitaryCombination::new(terms)
}

pub fn kraus_three_qubit(pair: &DephasingParams, gamma3: f64) -> Result<WeightedUnitaryMixture> {
    engineered_three_qubit(pair, gamma3, TableVariant::Corrected)?.try_into()
}
