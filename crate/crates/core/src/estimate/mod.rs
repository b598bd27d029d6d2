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

//! Decay-curve synthesis, measurement noise and correlation-factor fitting.

mod fit;

pub use fit::{
    bootstrap_ci, bootstrap_ci_with, fit_correlation, fit_joint, fit_point, seed_ensemble,
    Ensemble, FitResult, JointFit, PointFit, DEFAULT_BOOTSTRAP,
};

use rand_distr::{Distribution, StandardNormal};

use crate::curve::{CurveMeta, CurvePoint, DecayCurve, Method};
use crate::dephase::{engineered_three_qubit, CorrelationMatrix, DephasingParams, TableVariant};
use crate::error::{Error, Result};
use crate::exec::{substream, Execution};
use crate::nmrsim::{dq_closed_form, dq_decay_experiment, SpinSystem};
use crate::qec3::{closed_form_fe, closed_form_fe_dc, entanglement_fidelity, qec_round, NoiseChannel, QecLayout};

/// Which channel drives a synthesised QEC curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurveSource {
    /// Twelve-term engineered sum built from the pair weights.
    Engineered(TableVariant),
    /// Exact Gaussian dephasing.
    #[default]
    Analytic,
}

fn check_c(c: f64) -> Result<()> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("correlation factor {c} outside [0, 1]")))
    }
}

/// Simulated decay curve with `sigma = 0`, using the corrected engineered
/// mixture for QEC.
pub fn engineered_curve(method: Method, sys: &SpinSystem, c: f64, times: &[f64]) -> Result<DecayCurve> {
    engineered_curve_with(
        method,
        sys,
        c,
        times,
        CurveSource::Engineered(TableVariant::Corrected),
        Execution::default(),
    )
}

/// QEC curves correlate spins 0 and 1 and leave spin 2 independent; DQ
/// curves use spins 0 and 1 only and ignore `source`.
pub fn engineered_curve_with(
    method: Method,
    sys: &SpinSystem,
    c: f64,
    times: &[f64],
    source: CurveSource,
    exec: Execution,
) -> Result<DecayCurve> {
    check_c(c)?;
    if times.is_empty() {
        return Err(Error::EmptyCurve);
    }
    if method == Method::Dq {
        return dq_decay_experiment(sys, c, times);
    }
    if sys.n_spins() != 3 {
        return Err(Error::RateCount { expected: 3, found: sys.n_spins() });
    }
    let g = sys.gamma();
    let values = exec.try_map(times.len(), |i| -> Result<f64> {
        let t = times[i];
        let channel = match source {
            CurveSource::Engineered(variant) => {
                let pair = DephasingParams::two_qubit(g[0], g[1], c, t)?;
                NoiseChannel::Engineered(engineered_three_qubit(&pair, g[2], variant)?)
            }
            CurveSource::Analytic => {
                let corr = CorrelationMatrix::independent(3).with(0, 1, c)?;
                NoiseChannel::Analytic(DephasingParams::new(g.clone(), corr, t)?)
            }
        };
        let round = qec_round(channel, QecLayout::default())?.at_time(t);
        Ok(entanglement_fidelity(&round)?.f_e)
    })?;
    let points = times
        .iter()
        .zip(values)
        .map(|(&t, value)| CurvePoint { t, value, sigma: 0.0 })
        .collect();
    DecayCurve::new(
        method,
        points,
        CurveMeta {
            gamma: g,
            c: Some(c),
            ..CurveMeta::default()
        },
    )
}

/// Adds i.i.d. `N(0, noise_sigma^2)` to every value and records the sigma.
pub fn add_measurement_noise(curve: &DecayCurve, noise_sigma: f64, seed: u64) -> Result<DecayCurve> {
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise sigma {noise_sigma} must be >= 0")));
    }
    if noise_sigma == 0.0 {
        return Ok(curve.clone());
    }
    let mut rng = substream(seed, 0);
    let noisy = curve.map_points(|p| {
        let e: f64 = StandardNormal.sample(&mut rng);
        CurvePoint {
            t: p.t,
            value: p.value + noise_sigma * e,
            sigma: noise_sigma,
        }
    });
    let mut noisy = noisy;
    noisy.metadata.seed = Some(seed);
    noisy.metadata.noise_sigma = noise_sigma;
    Ok(noisy)
}

/// The method's closed-form curve value.
pub fn model_value(method: Method, gamma: &[f64], c: f64, t: f64) -> f64 {
    match method {
        Method::Qec => closed_form_fe(gamma[0], gamma[1], gamma[2], c, t),
        Method::Dq => dq_closed_form(gamma[0], gamma[1], c, t),
    }
}

/// `d model_value / dc`.
pub fn model_derivative(method: Method, gamma: &[f64], c: f64, t: f64) -> f64 {
    match method {
        Method::Qec => closed_form_fe_dc(gamma[0], gamma[1], gamma[2], c, t),
        Method::Dq => -2.0 * t * (gamma[0] * gamma[1]).sqrt() * dq_closed_form(gamma[0], gamma[1], c, t),
    }
}

pub(crate) fn check_rates(method: Method, gamma: &[f64]) -> Result<()> {
    if gamma.len() != method.rate_count() {
        return Err(Error::RateCount {
            expected: method.rate_count(),
            found: gamma.len(),
        });
    }
    if let Some(g) = gamma.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(Error::InvalidParameter(format!("relaxation rate {g} must be >= 0")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::TimeGrid;

    fn grid() -> Vec<f64> {
        TimeGrid::new(0.0, 0.32, 10).unwrap().points()
    }

    #[test]
    fn qec_curve_starts_at_one() {
        let sys = SpinSystem::acetyl_chloride();
        let curve = engineered_curve(Method::Qec, &sys, 0.0, &grid()).unwrap();
        assert!((curve.points()[0].value - 1.0).abs() < 1e-12);
        assert!(curve.points().iter().all(|p| p.sigma == 0.0));
    }

    #[test]
    fn qec_curve_matches_closed_form_for_both_sources() {
        let sys = SpinSystem::acetyl_chloride();
        let g = sys.gamma();
        for source in [CurveSource::Analytic, CurveSource::Engineered(TableVariant::Corrected)] {
            for c in [0.0, 0.5, 1.0] {
                let curve = engineered_curve_with(Method::Qec, &sys, c, &grid(), source, Execution::Sequential).unwrap();
                for p in curve.points() {
                    assert!((p.value - model_value(Method::Qec, &g, c, p.t)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn as_printed_table_biases_curve() {
        let sys = SpinSystem::acetyl_chloride();
        let src = CurveSource::Engineered(TableVariant::AsPrinted);
        let curve = engineered_curve_with(Method::Qec, &sys, 1.0, &grid(), src, Execution::Sequential).unwrap();
        let g = sys.gamma();
        let worst = curve
            .points()
            .iter()
            .map(|p| (p.value - model_value(Method::Qec, &g, 1.0, p.t)).abs())
            .fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    #[test]
    fn curve_separation_on_table_rates() {
        let sys = SpinSystem::acetyl_chloride();
        let t = TimeGrid::new(0.0, 0.32, 321).unwrap().points();
        let a = engineered_curve(Method::Qec, &sys, 0.0, &t).unwrap().values();
        let b = engineered_curve(Method::Qec, &sys, 1.0, &t).unwrap().values();
        let sep = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!((sep - 0.018_836_747_582).abs() < 1e-9, "{sep}");
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let g3 = [1.0 / 2.1, 1.0 / 0.24, 1.0 / 1.2];
        for method in [Method::Qec, Method::Dq] {
            let g = &g3[..method.rate_count()];
            for (c, t) in [(0.2, 0.1), (0.7, 0.3)] {
                let h = 1e-6;
                let fd = (model_value(method, g, c + h, t) - model_value(method, g, c - h, t)) / (2.0 * h);
                assert!((fd - model_derivative(method, g, c, t)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn input_validation() {
        let sys = SpinSystem::acetyl_chloride();
        assert!(engineered_curve(Method::Qec, &sys, 1.5, &grid()).is_err());
        assert_eq!(engineered_curve(Method::Qec, &sys, 0.5, &[]), Err(Error::EmptyCurve));
        let pair = sys.subsystem(&[0, 1]).unwrap();
        assert!(engineered_curve(Method::Qec, &pair, 0.5, &grid()).is_err());
        assert!(engineered_curve(Method::Dq, &pair, 0.5, &grid()).is_ok());
    }

    #[test]
    fn zero_noise_is_identity() {
        let sys = SpinSystem::acetyl_chloride();
        let curve = engineered_curve(Method::Dq, &sys, 0.3, &grid()).unwrap();
        assert_eq!(add_measurement_noise(&curve, 0.0, 9).unwrap(), curve);
        assert!(add_measurement_noise(&curve, -1.0, 9).is_err());
    }

    #[test]
    fn noise_is_seeded_and_unbiased() {
        let sys = SpinSystem::acetyl_chloride();
        let curve = engineered_curve(Method::Dq, &sys, 0.3, &[0.1]).unwrap();
        let a = add_measurement_noise(&curve, 0.01, 5).unwrap();
        assert_eq!(a, add_measurement_noise(&curve, 0.01, 5).unwrap());
        assert_ne!(a, add_measurement_noise(&curve, 0.01, 6).unwrap());
        assert_eq!(a.points()[0].sigma, 0.01);
        assert_eq!(a.metadata.seed, Some(5));

        let n = 10_000;
        let mean = (0..n)
            .map(|s| add_measurement_noise(&curve, 0.01, s).unwrap().points()[0].value)
            .sum::<f64>()
            / n as f64;
        assert!((mean - curve.points()[0].value).abs() < 4.0 * 0.01 / 100.0);
    }
}
