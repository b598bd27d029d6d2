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

//! Weak-coupling liquid-state spin dynamics with ideal pulses.
//!
//! The rotating-frame Hamiltonian is diagonal,
//! `H = sum_i pi nu_i Z_i + sum_{i<j} (pi/2) J_ij Z_i Z_j` (rad/s, with `nu`
//! and `J` in Hz), so free evolution only rephases coherences. Delays may
//! also apply the analytic dephasing channel for their duration; both maps
//! are diagonal and commute.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::curve::{CurveMeta, CurvePoint, DecayCurve, Method};
use crate::dephase::{analytic_dephase, DephasingModel};
use crate::error::{Error, Result};
use crate::opcore::{
    apply, bit, conjugate_diagonal, expectation, gate, pauli_string, ComplexMatrix,
    DensityMatrix, Gate, Pauli, UnitaryOp, C64,
};

/// Spins with rotating-frame offsets, scalar couplings and `T2` times.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    offsets_hz: Vec<f64>,
    j_hz: Vec<f64>,
    t2: Vec<f64>,
}

impl SpinSystem {
    pub fn new(offsets_hz: Vec<f64>, j_hz: &[Vec<f64>], t2: Vec<f64>) -> Result<Self> {
        let n = offsets_hz.len();
        if n == 0 {
            return Err(Error::InvalidParameter("spin system needs at least one spin".into()));
        }
        if t2.len() != n || j_hz.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if t2.len() != n { t2.len() } else { j_hz.len() },
            });
        }
        if let Some(t) = t2.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidParameter(format!("T2 = {t} must be > 0")));
        }
        let mut j = vec![0.0; n * n];
        for (r, row) in j_hz.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            for (c, &v) in row.iter().enumerate() {
                if r == c && v != 0.0 {
                    return Err(Error::InvalidParameter(format!("J_{r}{r} must be zero")));
                }
                if v != j_hz[c][r] {
                    return Err(Error::InvalidParameter(format!("J not symmetric at ({r},{c})")));
                }
                j[r * n + c] = v;
            }
        }
        Ok(Self {
            offsets_hz,
            j_hz: j,
            t2,
        })
    }

    /// Two carbons and the methyl proton group of labelled acetyl chloride,
    /// in the order `[C1, C2, M]`.
    ///
    /// The `T2` values are measured ones. Offsets and couplings are
    /// placeholders of the right magnitude; supply real values through the
    /// config file when they matter.
    pub fn acetyl_chloride() -> Self {
        Self::new(
            vec![1500.0, -1500.0, 0.0],
            &[
                vec![0.0, 50.0, 6.5],
                vec![50.0, 0.0, 130.0],
                vec![6.5, 130.0, 0.0],
            ],
            vec![2.1, 0.24, 1.2],
        )
        .expect("valid defaults")
    }

    pub fn n_spins(&self) -> usize {
        self.offsets_hz.len()
    }

    pub fn offsets_hz(&self) -> &[f64] {
        &self.offsets_hz
    }

    pub fn t2(&self) -> &[f64] {
        &self.t2
    }

    pub fn j(&self, a: usize, b: usize) -> f64 {
        self.j_hz[a * self.n_spins() + b]
    }

    pub fn j_rows(&self) -> Vec<Vec<f64>> {
        let n = self.n_spins();
        (0..n).map(|r| self.j_hz[r * n..(r + 1) * n].to_vec()).collect()
    }

    /// Transverse relaxation rates `1 / T2`.
    pub fn gamma(&self) -> Vec<f64> {
        self.t2.iter().map(|t| 1.0 / t).collect()
    }

    /// `|nu_i - nu_j| > 10 |J_ij| / 2` for every coupled pair.
    pub fn weak_coupling_valid(&self) -> bool {
        let n = self.n_spins();
        (0..n).all(|a| {
            (a + 1..n).all(|b| {
                let j = self.j(a, b);
                j == 0.0 || (self.offsets_hz[a] - self.offsets_hz[b]).abs() > 5.0 * j.abs()
            })
        })
    }

    /// The spins listed, in that order.
    pub fn subsystem(&self, spins: &[usize]) -> Result<Self> {
        for (k, &s) in spins.iter().enumerate() {
            if s >= self.n_spins() {
                return Err(Error::QubitOutOfRange { index: s, n_qubits: self.n_spins() });
            }
            if spins[..k].contains(&s) {
                return Err(Error::RepeatedQubit(s));
            }
        }
        let j: Vec<Vec<f64>> = spins
            .iter()
            .map(|&a| spins.iter().map(|&b| self.j(a, b)).collect())
            .collect();
        Self::new(
            spins.iter().map(|&s| self.offsets_hz[s]).collect(),
            &j,
            spins.iter().map(|&s| self.t2[s]).collect(),
        )
    }

    /// Diagonal of `H` in rad/s.
    pub fn energies(&self) -> Vec<f64> {
        let n = self.n_spins();
        (0..1usize << n)
            .map(|k| {
                let z: Vec<f64> = (0..n).map(|q| 1.0 - 2.0 * bit(k, q, n) as f64).collect();
                let mut e = 0.0;
                for a in 0..n {
                    e += PI * self.offsets_hz[a] * z[a];
                    for b in a + 1..n {
                        e += FRAC_PI_2 * self.j(a, b) * z[a] * z[b];
                    }
                }
                e
            })
            .collect()
    }
}

/// Ideal instantaneous rotation `exp(-i angle/2 (cos(phase) X + sin(phase) Y))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub spin: usize,
    pub phase: f64,
    pub angle: f64,
}

impl Pulse {
    pub fn x(spin: usize, angle: f64) -> Self {
        Self { spin, phase: 0.0, angle }
    }

    pub fn y(spin: usize, angle: f64) -> Self {
        Self { spin, phase: FRAC_PI_2, angle }
    }

    fn unitary(&self, n: usize) -> Result<UnitaryOp> {
        gate(
            Gate::RotXy {
                target: self.spin,
                phase: self.phase,
                angle: self.angle,
            },
            n,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PulseEvent {
    Delay { duration: f64, with_dephasing: bool },
    Pulse(Pulse),
    Simultaneous(Vec<Pulse>),
}

impl PulseEvent {
    pub fn delay(duration: f64) -> Self {
        PulseEvent::Delay { duration, with_dephasing: true }
    }
}

/// `exp(-i H t)`.
pub fn propagator(sys: &SpinSystem, t: f64) -> UnitaryOp {
    let phases: Vec<f64> = sys.energies().iter().map(|e| e * t).collect();
    UnitaryOp::from_phases(&phases).expect("diagonal phases are unitary")
}

pub fn free_evolution(rho: &DensityMatrix, sys: &SpinSystem, t: f64) -> Result<DensityMatrix> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("evolution time {t} must be >= 0")));
    }
    rho.check_qubits(sys.n_spins())?;
    let phases: Vec<f64> = sys.energies().iter().map(|e| e * t).collect();
    Ok(conjugate_diagonal(rho, &phases))
}

/// Runs `events` in order. Delays evolve under `H` and, when flagged and a
/// noise model is given, dephase for the same duration.
pub fn run_sequence(
    rho: &DensityMatrix,
    sys: &SpinSystem,
    events: &[PulseEvent],
    noise: Option<&DephasingModel>,
) -> Result<DensityMatrix> {
    let n = sys.n_spins();
    rho.check_qubits(n)?;
    if let Some(m) = noise {
        if m.n_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.n_qubits() });
        }
    }
    let mut state = rho.clone();
    for ev in events {
        state = match ev {
            PulseEvent::Delay { duration, with_dephasing } => {
                let evolved = free_evolution(&state, sys, *duration)?;
                match noise {
                    Some(m) if *with_dephasing => analytic_dephase(&evolved, &m.at(*duration)?)?,
                    _ => evolved,
                }
            }
            PulseEvent::Pulse(p) => apply(&state, &p.unitary(n)?)?,
            PulseEvent::Simultaneous(ps) => {
                let mut s = state;
                for p in ps {
                    s = apply(&s, &p.unitary(n)?)?;
                }
                s
            }
        };
    }
    Ok(state)
}

/// `tau/2 -> pi_x on every listed spin -> tau/2`.
pub fn echo_sequence(tau: f64, spins: &[usize]) -> Vec<PulseEvent> {
    vec![
        PulseEvent::delay(tau / 2.0),
        PulseEvent::Simultaneous(spins.iter().map(|&s| Pulse::x(s, PI)).collect()),
        PulseEvent::delay(tau / 2.0),
    ]
}

/// `|00><11| + |11><00|` on a two-spin register.
pub fn double_quantum_deviation() -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(4);
    m[(0, 3)] = C64::new(1.0, 0.0);
    m[(3, 0)] = C64::new(1.0, 0.0);
    DensityMatrix::deviation(m).expect("traceless Hermitian")
}

/// `exp(-(g1 + g2) t - 2 c t sqrt(g1 g2))`.
pub fn dq_closed_form(gamma1: f64, gamma2: f64, c12: f64, t: f64) -> f64 {
    (-(gamma1 + gamma2) * t - 2.0 * c12 * t * (gamma1 * gamma2).sqrt()).exp()
}

fn pair_model(pair: &SpinSystem, c12: f64) -> Result<DephasingModel> {
    let g = pair.gamma();
    DephasingModel::pair(g[0], g[1], c12)
}

fn dq_signal(pair: &SpinSystem, model: &DephasingModel, tau: f64) -> Result<f64> {
    let mut events = echo_sequence(tau, &[0, 1]);
    // Only single-quantum coherence is observable: rotate spin 0 and read
    // the antiphase Z0 X1 term on spin 1.
    events.push(PulseEvent::Pulse(Pulse::y(0, FRAC_PI_2)));
    let out = run_sequence(&double_quantum_deviation(), pair, &events, Some(model))?;
    let readout = pauli_string(&[(0, Pauli::Z), (1, Pauli::X)], 2)?;
    expectation(&out, readout.matrix())
}

/// Double-quantum echo decay of spins 0 and 1, normalised to `tau = 0`.
pub fn dq_decay_experiment(sys: &SpinSystem, c12: f64, tau_list: &[f64]) -> Result<DecayCurve> {
    let pair = sys.subsystem(&[0, 1])?;
    let model = pair_model(&pair, c12)?;
    let reference = dq_signal(&pair, &model, 0.0)?;
    let points = tau_list
        .iter()
        .map(|&tau| {
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(Error::InvalidParameter(format!("delay {tau} must be >= 0")));
            }
            Ok(CurvePoint {
                t: tau,
                value: dq_signal(&pair, &model, tau)? / reference,
                sigma: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DecayCurve::new(
        Method::Dq,
        points,
        CurveMeta {
            gamma: pair.gamma(),
            c: Some(c12),
            ..CurveMeta::default()
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefocusingAmplitudes {
    /// A `pi` pulse on spin 0 halfway through the delay.
    pub with_decoupling: f64,
    /// No mid-delay pulse: the coherence stays double-quantum throughout.
    pub without: f64,
}

/// Double-quantum amplitude after `tau` with and without a mid-delay `pi`
/// pulse on one spin of the correlated pair.
pub fn refocusing_cancellation_check(sys: &SpinSystem, c12: f64, tau: f64) -> Result<RefocusingAmplitudes> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter(format!("delay {tau} must be > 0")));
    }
    let pair = sys.subsystem(&[0, 1])?;
    let model = pair_model(&pair, c12)?;
    let rho0 = double_quantum_deviation();
    let amplitude = |events: &[PulseEvent]| -> Result<f64> {
        let out = run_sequence(&rho0, &pair, events, Some(&model))?;
        Ok(out.element(0, 3).norm() / rho0.element(0, 3).norm())
    };
    let with_decoupling = amplitude(&[
        PulseEvent::delay(tau / 2.0),
        PulseEvent::Pulse(Pulse::x(0, PI)),
        PulseEvent::delay(tau / 2.0),
        PulseEvent::Pulse(Pulse::x(0, -PI)),
    ])?;
    let without = amplitude(&[PulseEvent::delay(tau)])?;
    Ok(RefocusingAmplitudes { with_decoupling, without })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_spin(nu: [f64; 2], j: f64) -> SpinSystem {
        SpinSystem::new(nu.to_vec(), &[vec![0.0, j], vec![j, 0.0]], vec![2.1, 0.24]).unwrap()
    }

    fn test_state() -> DensityMatrix {
        let mut m = ComplexMatrix::zeros(4);
        let vals = [0.4, 0.3, 0.2, 0.1];
        for (i, v) in vals.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        for (r, c, z) in [(0, 1, C64::new(0.05, 0.02)), (0, 3, C64::new(0.07, -0.01)), (1, 2, C64::new(-0.03, 0.04)), (2, 3, C64::new(0.02, 0.0))] {
            m[(r, c)] = z;
            m[(c, r)] = z.conj();
        }
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn spin_system_validation() {
        assert!(SpinSystem::new(vec![0.0], &[vec![0.0]], vec![0.0]).is_err());
        assert!(SpinSystem::new(vec![0.0, 1.0], &[vec![0.0, 1.0], vec![2.0, 0.0]], vec![1.0, 1.0]).is_err());
        assert!(SpinSystem::new(vec![0.0, 1.0], &[vec![1.0, 0.0], vec![0.0, 0.0]], vec![1.0, 1.0]).is_err());
        let s = SpinSystem::acetyl_chloride();
        assert!(s.weak_coupling_valid());
        assert!(!two_spin([0.0, 10.0], 50.0).weak_coupling_valid());
    }

    #[test]
    fn zero_time_is_identity() {
        let s = two_spin([120.0, -40.0], 50.0);
        assert_eq!(free_evolution(&test_state(), &s, 0.0).unwrap(), test_state());
    }

    #[test]
    fn coupling_full_period_is_global_phase() {
        let j = 50.0;
        let s = two_spin([0.0, 0.0], j);
        let out = free_evolution(&test_state(), &s, 2.0 / j).unwrap();
        assert!(out.matrix().approx_eq(test_state().matrix(), 1e-12));
    }

    #[test]
    fn coupling_half_period_is_local_z() {
        let j = 50.0;
        let s = two_spin([0.0, 0.0], j);
        let u = propagator(&s, 1.0 / j);
        let zz = pauli_string(&[(0, Pauli::Z), (1, Pauli::Z)], 2).unwrap();
        let expect = zz.matrix().scale(C64::new(0.0, -1.0));
        assert!(u.matrix().approx_eq(&expect, 1e-12));
        // Populations untouched, coherences only pick up Z1 Z2 signs.
        let out = free_evolution(&test_state(), &s, 1.0 / j).unwrap();
        let via_zz = apply(&test_state(), &zz).unwrap();
        assert!(out.matrix().approx_eq(via_zz.matrix(), 1e-12));
    }

    #[test]
    fn populations_preserved() {
        let s = two_spin([321.0, -77.0], 48.0);
        let out = free_evolution(&test_state(), &s, 0.0137).unwrap();
        assert_eq!(out.matrix().diagonal(), test_state().matrix().diagonal());
    }

    #[test]
    fn empty_sequence() {
        let s = two_spin([1.0, 2.0], 0.0);
        assert_eq!(run_sequence(&test_state(), &s, &[], None).unwrap(), test_state());
    }

    #[test]
    fn echo_refocuses_offsets_not_coupling() {
        let tau = 0.0123;
        let pis = PulseEvent::Simultaneous(vec![Pulse::x(0, PI), Pulse::x(1, PI)]);
        let rho = test_state();
        let pi_rotated = run_sequence(&rho, &two_spin([0.0, 0.0], 0.0), &[pis], None).unwrap();

        let s = two_spin([431.0, -251.0], 0.0);
        let out = run_sequence(&rho, &s, &echo_sequence(tau, &[0, 1]), None).unwrap();
        assert!(out.matrix().approx_eq(pi_rotated.matrix(), 1e-12));

        let coupled = two_spin([431.0, -251.0], 50.0);
        let out = run_sequence(&rho, &coupled, &echo_sequence(tau, &[0, 1]), None).unwrap();
        assert!(!out.matrix().approx_eq(pi_rotated.matrix(), 1e-6));
        // What remains is exactly the coupling evolution.
        let j_only = two_spin([0.0, 0.0], 50.0);
        let expect = free_evolution(&pi_rotated, &j_only, tau).unwrap();
        assert!(out.matrix().approx_eq(expect.matrix(), 1e-12));
    }

    #[test]
    fn dq_curve_matches_closed_form() {
        let sys = SpinSystem::acetyl_chloride();
        let taus = [0.0, 0.05, 0.1, 0.2, 0.32];
        for c in [0.0, 0.3, 1.0] {
            let curve = dq_decay_experiment(&sys, c, &taus).unwrap();
            for p in curve.points() {
                let expect = dq_closed_form(1.0 / 2.1, 1.0 / 0.24, c, p.t);
                assert!((p.value - expect).abs() < 1e-10, "c={c} t={} {} vs {expect}", p.t, p.value);
            }
        }
        let curve = dq_decay_experiment(&sys, 0.3, &[0.1]).unwrap();
        assert!((curve.points()[0].value - 0.577_641_907_350_331).abs() < 1e-10);
    }

    #[test]
    fn dq_rejects_negative_delay() {
        assert!(dq_decay_experiment(&SpinSystem::acetyl_chloride(), 0.3, &[-0.1]).is_err());
    }

    #[test]
    fn refocusing_cases() {
        let sys = SpinSystem::acetyl_chloride();
        let r = refocusing_cancellation_check(&sys, 0.0, 0.1).unwrap();
        assert!((r.with_decoupling - r.without).abs() < 1e-14);

        let g = 1.5;
        let eq = SpinSystem::new(vec![100.0, -100.0], &[vec![0.0, 50.0], vec![50.0, 0.0]], vec![1.0 / g, 1.0 / g]).unwrap();
        let tau = 0.2;
        let r = refocusing_cancellation_check(&eq, 1.0, tau).unwrap();
        assert!((r.without - (-4.0 * g * tau).exp()).abs() < 1e-13);
        assert!((r.with_decoupling - (-2.0 * g * tau).exp()).abs() < 1e-13);

        let r = refocusing_cancellation_check(&sys, 0.5, 0.1).unwrap();
        assert!(r.with_decoupling > r.without);
        assert!(refocusing_cancellation_check(&sys, 0.5, 0.0).is_err());
    }
}
