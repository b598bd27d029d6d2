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

//! The oracle-equivalence suite behind `qnp validate`.

use qnp::dephase::{
    analytic_dephase, decay_factor_index, engineered_three_qubit, monte_carlo_phase_average,
    CorrelationMatrix, DephasingParams, PairWeights, TableVariant,
};
use qnp::nmrsim::{dq_closed_form, dq_decay_experiment, refocusing_cancellation_check, SpinSystem};
use qnp::opcore::{pauli_string, DensityMatrix, Pauli, C64};
use qnp::qec3::{closed_form_fe, entanglement_fidelity, qec_round, state_correlation, NoiseChannel, QecLayout};
use qnp::{Execution, TimeGrid};
use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    fn new(name: &'static str, max_deviation: f64, tolerance: f64, note: String) -> Self {
        Self {
            name,
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
            note,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub spins: SpinSystem,
    pub table: TableVariant,
    pub samples: usize,
    pub seed: u64,
    pub exec: Execution,
}

fn times() -> Vec<f64> {
    TimeGrid::new(0.0, 0.32, 9).expect("static grid").points()
}

const CS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// A few fixed, generic three-qubit pure states.
fn probe_states() -> Vec<DensityMatrix> {
    (1..=4)
        .map(|s| {
            let psi: Vec<C64> = (0..8)
                .map(|k| {
                    let x = (s * 7 + k * 3) as f64;
                    C64::from_polar(1.0 + (x * 0.37).sin().abs(), x * 1.13)
                })
                .collect();
            DensityMatrix::from_pure(&psi).expect("nonzero vector")
        })
        .collect()
}

fn table_sum(o: &SuiteOptions) -> Check {
    let g = o.spins.gamma();
    let (mut dev, mut defect_err) = (0.0f64, 0.0f64);
    for &c in &CS {
        for &t in &times() {
            let sum = PairWeights::from_rates(g[0], g[1], c, t, o.table).sum();
            dev = dev.max((sum - 1.0).abs());
            let x = 2.0 * c * t * (g[0] * g[1]).sqrt();
            let predicted = (-(g[0] + g[1]) * t).exp() * x.sinh();
            defect_err = defect_err.max((sum - 1.0 - predicted).abs());
        }
    }
    let note = match o.table {
        TableVariant::Corrected => "weights sum to one".to_string(),
        TableVariant::AsPrinted => format!(
            "trace not preserved: defect equals e^-(g1+g2)t sinh(2ct sqrt(g1 g2)) to {defect_err:.1e}"
        ),
    };
    Check::new("table-trace-preservation", dev, 1e-12, note)
}

fn kraus_vs_analytic(o: &SuiteOptions) -> CliResult<Check> {
    let g = o.spins.gamma();
    let mut dev = 0.0f64;
    for &c in &CS {
        for &t in &times() {
            let pair = DephasingParams::two_qubit(g[0], g[1], c, t)?;
            let mixture = engineered_three_qubit(&pair, g[2], o.table)?;
            let corr = CorrelationMatrix::independent(3).with(0, 1, c)?;
            let full = DephasingParams::new(g[..3].to_vec(), corr, t)?;
            for rho in probe_states() {
                let a = analytic_dephase(&rho, &full)?;
                dev = dev.max(a.matrix().max_abs_diff(mixture.apply(&rho)?.matrix()));
            }
        }
    }
    Ok(Check::new("kraus-vs-analytic", dev, 1e-10, "12-term mixture on probe states".into()))
}

fn fe_closed_form(o: &SuiteOptions) -> CliResult<Check> {
    let g = o.spins.gamma();
    let mut dev = 0.0f64;
    for &c in &CS {
        for &t in &times() {
            let pair = DephasingParams::two_qubit(g[0], g[1], c, t)?;
            let ch = NoiseChannel::Engineered(engineered_three_qubit(&pair, g[2], o.table)?);
            let fe = entanglement_fidelity(&qec_round(ch, QecLayout::default())?)?.f_e;
            dev = dev.max((fe - closed_form_fe(g[0], g[1], g[2], c, t)).abs());
        }
    }
    Ok(Check::new("fe-closed-form", dev, 1e-9, "QEC round vs closed form".into()))
}

fn code_behaviour() -> CliResult<Check> {
    let mut dev = 0.0f64;
    for mask in 1u32..8 {
        let terms: Vec<(usize, Pauli)> = (0..3).filter(|q| mask >> q & 1 == 1).map(|q| (q, Pauli::Z)).collect();
        let round = qec_round(NoiseChannel::Unitary(pauli_string(&terms, 3)?), QecLayout::default())?;
        let expect = if terms.len() == 1 { [1.0, 1.0, 1.0] } else { [-1.0, -1.0, 1.0] };
        for (p, e) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().zip(expect) {
            dev = dev.max((state_correlation(&round, p)? - e).abs());
        }
    }
    Ok(Check::new(
        "code-z-errors",
        dev,
        1e-12,
        "single Z corrected; double/triple give f_x = f_y = -1".into(),
    ))
}

fn monte_carlo(o: &SuiteOptions) -> CliResult<Check> {
    let g = o.spins.gamma();
    let corr = CorrelationMatrix::independent(3).with(0, 1, 0.5)?;
    let params = DephasingParams::new(g[..3].to_vec(), corr, 0.2)?;
    let avg = monte_carlo_phase_average(&params, o.samples, o.seed, o.exec)?;
    let (mut worst_se, mut worst_abs) = (0.0f64, 0.0f64);
    for k in 0..8 {
        for l in 0..8 {
            let d = (avg.factor(k, l).re - decay_factor_index(k, l, &params)).abs();
            worst_abs = worst_abs.max(d);
            let se = avg.std_err(k, l);
            if se > 0.0 {
                worst_se = worst_se.max(d / se);
            } else if d > 0.0 {
                worst_se = f64::INFINITY;
            }
        }
    }
    Ok(Check::new(
        "mc-convergence",
        worst_se,
        4.0,
        format!("{} samples, seed {}; deviation in standard errors (max abs {worst_abs:.2e})", o.samples, o.seed),
    ))
}

fn dq_and_refocusing(o: &SuiteOptions) -> CliResult<[Check; 2]> {
    let g = o.spins.gamma();
    let t = times();
    let mut dev = 0.0f64;
    let mut refocus = 0.0f64;
    for &c in &CS {
        let curve = dq_decay_experiment(&o.spins, c, &t)?;
        for p in curve.points() {
            dev = dev.max((p.value - dq_closed_form(g[0], g[1], c, p.t)).abs());
        }
        for &tau in &t[1..] {
            let r = refocusing_cancellation_check(&o.spins, c, tau)?;
            refocus = refocus.max((r.with_decoupling.ln() + (g[0] + g[1]) * tau).abs());
            refocus = refocus.max((r.without.ln() + (g[0] + g[1] + 2.0 * c * (g[0] * g[1]).sqrt()) * tau).abs());
        }
    }
    Ok([
        Check::new("dq-closed-form", dev, 1e-10, "echo experiment vs closed form".into()),
        Check::new(
            "refocusing-cancellation",
            refocus,
            1e-12,
            "mid-delay pi pulse removes the correlation exponent".into(),
        ),
    ])
}

pub fn run_suite(o: &SuiteOptions) -> CliResult<Vec<Check>> {
    let [dq, refocus] = dq_and_refocusing(o)?;
    Ok(vec![
        table_sum(o),
        kraus_vs_analytic(o)?,
        fe_closed_form(o)?,
        code_behaviour()?,
        monte_carlo(o)?,
        dq,
        refocus,
    ])
}
