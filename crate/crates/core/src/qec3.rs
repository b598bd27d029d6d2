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

//! Three-qubit phase-flip code with coherent (Toffoli) correction.
//!
//! Encoding: `H(data)`, `CNOT(data -> a0)`, `CNOT(data -> a1)`, then `H` on
//! all three qubits. Data `|+>` becomes `|+++>` and `|->` becomes `|--->`, so
//! a single physical `Z` is a correctable flip in the `+/-` basis while any
//! two or three `Z`s compose to the logical `Z = Z Z Z`. Decoding runs the
//! inverse with a Toffoli from the two syndrome qubits onto the data qubit;
//! syndrome information is left in the ancillas and traced away.

use serde::Serialize;

use crate::dephase::{analytic_dephase, apply_mixture, DephasingParams, UnitaryCombination, WeightedUnitaryMixture};
use crate::error::{Error, Result};
use crate::opcore::{
    apply, bit, gate, partial_trace, ComplexMatrix, DensityMatrix, Gate, Pauli, StateKind,
    UnitaryOp, C64, DEFAULT_TOL,
};

/// Which register slot holds the protected qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QecLayout {
    data: usize,
    ancillas: [usize; 2],
}

impl Default for QecLayout {
    fn default() -> Self {
        Self {
            data: 2,
            ancillas: [0, 1],
        }
    }
}

impl QecLayout {
    pub fn new(data: usize, ancillas: [usize; 2]) -> Result<Self> {
        let all = [data, ancillas[0], ancillas[1]];
        for (k, &q) in all.iter().enumerate() {
            if q > 2 {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: 3 });
            }
            if all[..k].contains(&q) {
                return Err(Error::RepeatedQubit(q));
            }
        }
        Ok(Self { data, ancillas })
    }

    pub fn data(&self) -> usize {
        self.data
    }

    pub fn ancillas(&self) -> [usize; 2] {
        self.ancillas
    }

    fn compose(&self, anc: [usize; 2], data: usize) -> usize {
        (anc[0] << (2 - self.ancillas[0])) | (anc[1] << (2 - self.ancillas[1])) | (data << (2 - self.data))
    }
}

pub fn encoder(layout: &QecLayout) -> UnitaryOp {
    let [a0, a1] = layout.ancillas;
    let d = layout.data;
    let gates = [
        Gate::Hadamard(d),
        Gate::Cnot { control: d, target: a0 },
        Gate::Cnot { control: d, target: a1 },
        Gate::Hadamard(a0),
        Gate::Hadamard(a1),
        Gate::Hadamard(d),
    ];
    circuit(&gates)
}

pub fn decoder(layout: &QecLayout) -> UnitaryOp {
    let [a0, a1] = layout.ancillas;
    let d = layout.data;
    let gates = [
        Gate::Hadamard(a0),
        Gate::Hadamard(a1),
        Gate::Hadamard(d),
        Gate::Cnot { control: d, target: a0 },
        Gate::Cnot { control: d, target: a1 },
        Gate::Toffoli { c1: a0, c2: a1, target: d },
        Gate::Hadamard(d),
    ];
    circuit(&gates)
}

fn circuit(gates: &[Gate]) -> UnitaryOp {
    let ops: Vec<UnitaryOp> = gates
        .iter()
        .map(|&g| gate(g, 3).expect("layout indices validated"))
        .collect();
    UnitaryOp::circuit(3, &ops).expect("three-qubit gates")
}

/// Logical Pauli on the code space: `X_L = XXX`, `Z_L = ZZZ`, `Y_L = i X_L Z_L`.
pub fn logical_operator(p: Pauli) -> ComplexMatrix {
    let triple = |q: Pauli| q.matrix().kron(&q.matrix()).kron(&q.matrix());
    match p {
        Pauli::I => ComplexMatrix::identity(8),
        Pauli::X => triple(Pauli::X),
        Pauli::Z => triple(Pauli::Z),
        Pauli::Y => (&triple(Pauli::X) * &triple(Pauli::Z)).scale(C64::new(0.0, 1.0)),
    }
}

fn ancilla_leakage(rho: &DensityMatrix, layout: &QecLayout) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..8 {
        for c in 0..8 {
            let r_ok = layout.ancillas.iter().all(|&a| bit(r, a, 3) == 0);
            let c_ok = layout.ancillas.iter().all(|&a| bit(c, a, 3) == 0);
            if !(r_ok && c_ok) {
                worst = worst.max(rho.element(r, c).norm());
            }
        }
    }
    worst
}

/// Encodes the data qubit; the ancillas must be in `|00>`.
pub fn encode(rho: &DensityMatrix, layout: &QecLayout) -> Result<DensityMatrix> {
    rho.check_qubits(3)?;
    let leak = ancilla_leakage(rho, layout);
    if leak > DEFAULT_TOL {
        return Err(Error::AncillaNotReset(leak));
    }
    apply(rho, &encoder(layout))
}

pub fn decode_correct(rho: &DensityMatrix, layout: &QecLayout) -> Result<DensityMatrix> {
    rho.check_qubits(3)?;
    apply(rho, &decoder(layout))
}

/// `|00><00|` on the ancillas tensored with `a` on the data qubit.
pub fn prepare_input(a: &ComplexMatrix, layout: &QecLayout, kind: StateKind) -> Result<DensityMatrix> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: a.dim() });
    }
    let mut m = ComplexMatrix::zeros(8);
    for r in 0..2 {
        for c in 0..2 {
            m[(layout.compose([0, 0], r), layout.compose([0, 0], c))] = a[(r, c)];
        }
    }
    DensityMatrix::with_tol(m, kind, DEFAULT_TOL)
}

/// Noise applied between encoding and decoding.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseChannel {
    Identity,
    Analytic(DephasingParams),
    Mixture(WeightedUnitaryMixture),
    /// Signed engineered sum, e.g. the twelve-experiment construction.
    Engineered(UnitaryCombination),
    Unitary(UnitaryOp),
}

impl NoiseChannel {
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match self {
            NoiseChannel::Identity => Ok(rho.clone()),
            NoiseChannel::Analytic(p) => analytic_dephase(rho, p),
            NoiseChannel::Mixture(m) => apply_mixture(rho, m),
            NoiseChannel::Engineered(c) => c.apply(rho),
            NoiseChannel::Unitary(u) => apply(rho, u),
        }
    }

    fn n_qubits(&self) -> Option<usize> {
        match self {
            NoiseChannel::Identity => None,
            NoiseChannel::Analytic(p) => Some(p.n_qubits()),
            NoiseChannel::Mixture(m) => Some(m.n_qubits()),
            NoiseChannel::Engineered(c) => Some(c.n_qubits()),
            NoiseChannel::Unitary(u) => Some(u.n_qubits()),
        }
    }

    fn duration(&self) -> f64 {
        match self {
            NoiseChannel::Analytic(p) => p.t(),
            _ => 0.0,
        }
    }
}

/// Maps a single-qubit deviation input `A` to the output deviation.
pub trait ChannelEvaluator {
    fn evaluate(&self, input: Pauli) -> Result<DensityMatrix>;

    /// Noise duration in seconds, for reports.
    fn duration(&self) -> f64 {
        0.0
    }
}

/// One encode / noise / decode-correct pass.
#[derive(Debug, Clone)]
pub struct QecRound {
    channel: NoiseChannel,
    layout: QecLayout,
    encoder: UnitaryOp,
    decoder: UnitaryOp,
    t: f64,
}

impl QecRound {
    /// Overrides the duration reported by [`entanglement_fidelity`].
    pub fn at_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn layout(&self) -> &QecLayout {
        &self.layout
    }

    /// Full three-qubit output state for a three-qubit input.
    pub fn run(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let leak = ancilla_leakage(rho, &self.layout);
        if leak > DEFAULT_TOL {
            return Err(Error::AncillaNotReset(leak));
        }
        let encoded = apply(rho, &self.encoder)?;
        let noisy = self.channel.apply(&encoded)?;
        apply(&noisy, &self.decoder)
    }
}

pub fn qec_round(channel: NoiseChannel, layout: QecLayout) -> Result<QecRound> {
    if let Some(n) = channel.n_qubits() {
        if n != 3 {
            return Err(Error::DimensionMismatch { expected: 8, found: 1 << n });
        }
    }
    let t = channel.duration();
    Ok(QecRound {
        encoder: encoder(&layout),
        decoder: decoder(&layout),
        channel,
        layout,
        t,
    })
}

fn deviation_input(p: Pauli) -> Result<ComplexMatrix> {
    if p == Pauli::I {
        return Err(Error::InvalidParameter(
            "state correlation is defined for X, Y and Z inputs".into(),
        ));
    }
    Ok(p.matrix())
}

impl ChannelEvaluator for QecRound {
    fn evaluate(&self, input: Pauli) -> Result<DensityMatrix> {
        let rho = prepare_input(&deviation_input(input)?, &self.layout, StateKind::Deviation)?;
        partial_trace(&self.run(&rho)?, &[self.layout.data])
    }

    fn duration(&self) -> f64 {
        self.t
    }
}

/// A single qubit sent through a one-qubit channel with no code.
#[derive(Debug, Clone)]
pub struct Unencoded(pub NoiseChannel);

impl ChannelEvaluator for Unencoded {
    fn evaluate(&self, input: Pauli) -> Result<DensityMatrix> {
        let rho = DensityMatrix::deviation(deviation_input(input)?)?;
        self.0.apply(&rho)
    }

    fn duration(&self) -> f64 {
        self.0.duration()
    }
}

/// `f_A = Tr[A E(A)] / 2`; one for a perfect channel.
pub fn state_correlation(eval: &impl ChannelEvaluator, a: Pauli) -> Result<f64> {
    let out = eval.evaluate(a)?;
    Ok(0.5 * crate::opcore::expectation(&out, &a.matrix())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityReport {
    pub f_x: f64,
    pub f_y: f64,
    pub f_z: f64,
    pub f_e: f64,
    pub t: f64,
}

impl FidelityReport {
    pub fn from_correlations(f_x: f64, f_y: f64, f_z: f64, t: f64) -> Self {
        Self {
            f_x,
            f_y,
            f_z,
            f_e: 0.25 * (1.0 + f_x + f_y + f_z),
            t,
        }
    }
}

pub fn entanglement_fidelity(eval: &impl ChannelEvaluator) -> Result<FidelityReport> {
    Ok(FidelityReport::from_correlations(
        state_correlation(eval, Pauli::X)?,
        state_correlation(eval, Pauli::Y)?,
        state_correlation(eval, Pauli::Z)?,
        eval.duration(),
    ))
}

/// Entanglement fidelity of one code round under correlated dephasing of
/// qubits 1 and 2 and independent dephasing of qubit 3.
pub fn closed_form_fe(gamma1: f64, gamma2: f64, gamma3: f64, c12: f64, t: f64) -> f64 {
    let x = 2.0 * c12 * t * (gamma1 * gamma2).sqrt();
    0.25 * (2.0 + (-gamma1 * t).exp() + (-gamma2 * t).exp() + (-gamma3 * t).exp()
        - (-(gamma1 + gamma2 + gamma3) * t).exp() * x.cosh())
}

/// `d F_E / d c12`.
pub fn closed_form_fe_dc(gamma1: f64, gamma2: f64, gamma3: f64, c12: f64, t: f64) -> f64 {
    let k = 2.0 * t * (gamma1 * gamma2).sqrt();
    -0.25 * (-(gamma1 + gamma2 + gamma3) * t).exp() * (k * c12).sinh() * k
}
