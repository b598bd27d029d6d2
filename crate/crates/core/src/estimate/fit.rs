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

//! Weighted least-squares fits of `c` with known rates, residual bootstrap
//! intervals and seed ensembles.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::goldensectionsearch::GoldenSectionSearch;
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::{add_measurement_noise, check_rates, model_derivative, model_value};
use crate::curve::{DecayCurve, Method};
use crate::error::{Error, Result};
use crate::exec::{substream, Execution};

pub const DEFAULT_BOOTSTRAP: usize = 200;
const MIN_BOOTSTRAP: usize = 100;
const SCAN_POINTS: usize = 41;
const GOLDEN_TOL: f64 = 1e-11;
const CLAMP_TOL: f64 = 1e-7;

/// Point estimate without an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointFit {
    pub c_hat: f64,
    pub residual_rms: f64,
    /// The unconstrained minimiser lies outside `[0, 1]`.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: Method,
    pub c_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub residual_rms: f64,
    pub n_bootstrap: usize,
    pub clamped: bool,
    pub seed: u64,
}

impl FitResult {
    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    pub fn contains(&self, c: f64) -> bool {
        self.ci_low <= c && c <= self.ci_high
    }
}

/// Times, values and least-squares weights of a curve under one model.
#[derive(Debug, Clone)]
struct Problem<'a> {
    method: Method,
    gamma: &'a [f64],
    t: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn new(curve: &DecayCurve, gamma: &'a [f64], method: Method) -> Result<Self> {
        check_rates(method, gamma)?;
        if curve.is_empty() {
            return Err(Error::EmptyCurve);
        }
        let sig: Vec<f64> = curve.points().iter().map(|p| p.sigma).collect();
        let w = if sig.iter().all(|&s| s == 0.0) {
            vec![1.0; sig.len()]
        } else if sig.iter().all(|&s| s > 0.0 && s.is_finite()) {
            sig.iter().map(|s| 1.0 / (s * s)).collect()
        } else {
            return Err(Error::DegenerateWeights(
                "sigmas must be all zero or all positive and finite".into(),
            ));
        };
        let p = Self {
            method,
            gamma,
            t: curve.times(),
            y: curve.values(),
            w,
        };
        if p.information(0.5) <= 0.0 {
            return Err(Error::DegenerateCurve("model value is independent of c at every time".into()));
        }
        Ok(p)
    }

    fn with_values(&self, y: Vec<f64>) -> Self {
        Self { y, ..self.clone() }
    }

    fn model(&self, c: f64) -> Vec<f64> {
        self.t.iter().map(|&t| model_value(self.method, self.gamma, c, t)).collect()
    }

    fn objective(&self, c: f64) -> f64 {
        self.t
            .iter()
            .zip(&self.y)
            .zip(&self.w)
            .map(|((&t, &y), &w)| w * (y - model_value(self.method, self.gamma, c, t)).powi(2))
            .sum()
    }

    fn gradient(&self, c: f64) -> f64 {
        self.t
            .iter()
            .zip(&self.y)
            .zip(&self.w)
            .map(|((&t, &y), &w)| {
                let r = y - model_value(self.method, self.gamma, c, t);
                -2.0 * w * r * model_derivative(self.method, self.gamma, c, t)
            })
            .sum()
    }

    /// Gauss-Newton curvature `sum w (dm/dc)^2`.
    fn information(&self, c: f64) -> f64 {
        self.t
            .iter()
            .zip(&self.w)
            .map(|(&t, &w)| w * model_derivative(self.method, self.gamma, c, t).powi(2))
            .sum()
    }

    fn residual_rms(&self, c: f64) -> f64 {
        let m = self.model(c);
        let ss: f64 = self.y.iter().zip(&m).map(|(y, m)| (y - m).powi(2)).sum();
        (ss / m.len() as f64).sqrt()
    }

    fn solve(&self) -> Result<PointFit> {
        // Coarse scan guards the bracket against a non-unimodal objective.
        let step = 1.0 / (SCAN_POINTS - 1) as f64;
        let (k, _) = (0..SCAN_POINTS)
            .map(|k| (k, self.objective(k as f64 * step)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        let lo = (k.saturating_sub(1)) as f64 * step;
        let hi = ((k + 1).min(SCAN_POINTS - 1)) as f64 * step;
        // The solver's tolerance is relative to |x|; searching over c + 1
        // keeps it effectively absolute near c = 0.
        let solver = GoldenSectionSearch::new(lo + 1.0, hi + 1.0)
            .and_then(|s| s.with_tolerance(GOLDEN_TOL))
            .map_err(|e| Error::Optimizer(e.to_string()))?;
        let res = Executor::new(Scalar(self), solver)
            .configure(|s| s.param(k as f64 * step + 1.0).max_iters(200))
            .timer(false)
            .run()
            .map_err(|e| Error::Optimizer(e.to_string()))?;
        let u = *res.state().get_best_param().ok_or_else(|| Error::Optimizer("no estimate".into()))?;
        let mut c = (u - 1.0).clamp(0.0, 1.0);
        for b in [0.0, 1.0] {
            if (c - b).abs() < CLAMP_TOL && self.objective(b) <= self.objective(c) {
                c = b;
            }
        }
        // One Newton step from a boundary tells which side the free minimum is on.
        let free = c - self.gradient(c) / (2.0 * self.information(c));
        let clamped = (c < CLAMP_TOL && free < -CLAMP_TOL) || (c > 1.0 - CLAMP_TOL && free > 1.0 + CLAMP_TOL);
        Ok(PointFit {
            c_hat: c,
            residual_rms: self.residual_rms(c),
            clamped,
        })
    }
}

struct Scalar<'p, 'a>(&'p Problem<'a>);

impl CostFunction for Scalar<'_, '_> {
    type Param = f64;
    type Output = f64;
    fn cost(&self, u: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.0.objective(u - 1.0))
    }
}

/// Weighted least squares of the method's closed form over `c` in `[0, 1]`.
///
/// Weights are `1/sigma^2`, or uniform when every sigma is zero.
pub fn fit_point(curve: &DecayCurve, gamma: &[f64], method: Method) -> Result<PointFit> {
    Problem::new(curve, gamma, method)?.solve()
}

/// Point fit plus a [`DEFAULT_BOOTSTRAP`]-replica interval seeded from the
/// curve metadata (or 0).
pub fn fit_correlation(curve: &DecayCurve, gamma: &[f64], method: Method) -> Result<FitResult> {
    bootstrap_ci(curve, gamma, method, DEFAULT_BOOTSTRAP, curve.metadata.seed.unwrap_or(0))
}

pub fn bootstrap_ci(curve: &DecayCurve, gamma: &[f64], method: Method, n_boot: usize, seed: u64) -> Result<FitResult> {
    bootstrap_ci_with(curve, gamma, method, n_boot, seed, Execution::default())
}

/// Residual bootstrap with a central 68% percentile interval.
///
/// Standardised residuals are inflated by `sqrt(n / (n - 1))` for the fitted
/// parameter and resampled with replacement onto the fitted curve. Replica
/// `b` draws from substream `b` of `seed`.
///
/// The nominal level is 68%, but the percentile levels are expanded to
/// `Phi(-t_{0.84, n-1})` so a noisy residual scale from a short curve does
/// not shrink the interval (Hesterberg's expanded percentile interval). It
/// is widened to contain `c_hat` when the bootstrap distribution is
/// one-sided.
pub fn bootstrap_ci_with(
    curve: &DecayCurve,
    gamma: &[f64],
    method: Method,
    n_boot: usize,
    seed: u64,
    exec: Execution,
) -> Result<FitResult> {
    if n_boot < MIN_BOOTSTRAP {
        return Err(Error::TooFewReplicas { min: MIN_BOOTSTRAP, found: n_boot });
    }
    let problem = Problem::new(curve, gamma, method)?;
    let fit = problem.solve()?;
    let n = problem.y.len();
    let fitted = problem.model(fit.c_hat);
    let scale: Vec<f64> = problem.w.iter().map(|w| 1.0 / w.sqrt()).collect();
    let inflate = if n > 1 { (n as f64 / (n - 1) as f64).sqrt() } else { 1.0 };
    let resid: Vec<f64> = (0..n).map(|i| inflate * (problem.y[i] - fitted[i]) / scale[i]).collect();

    let mut reps = exec.try_map(n_boot, |b| -> Result<f64> {
        let mut rng = substream(seed, b as u64);
        let y = (0..n).map(|i| fitted[i] + scale[i] * resid[rng.random_range(0..n)]).collect();
        Ok(problem.with_values(y).solve()?.c_hat)
    })?;
    reps.sort_by(f64::total_cmp);
    let lo = expanded_level(n);
    let ci_low = quantile(&reps, lo).min(fit.c_hat);
    let ci_high = quantile(&reps, 1.0 - lo).max(fit.c_hat);
    Ok(FitResult {
        method,
        c_hat: fit.c_hat,
        ci_low,
        ci_high,
        residual_rms: fit.residual_rms,
        n_bootstrap: n_boot,
        clamped: fit.clamped,
        seed,
    })
}

/// Lower percentile level of the expanded central 68% interval.
fn expanded_level(n: usize) -> f64 {
    let z = Normal::standard();
    if n < 3 {
        return 0.16;
    }
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
    z.cdf(t.inverse_cdf(0.16))
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Point fits of many noisy copies of one clean curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub seeds: Vec<u64>,
    pub fits: Vec<PointFit>,
}

impl Ensemble {
    pub fn estimates(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.c_hat).collect()
    }

    pub fn mean(&self) -> f64 {
        self.fits.iter().map(|f| f.c_hat).sum::<f64>() / self.fits.len() as f64
    }

    /// Sample standard deviation.
    pub fn std(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.fits.iter().map(|f| (f.c_hat - m).powi(2)).sum();
        (ss / (self.fits.len() as f64 - 1.0)).sqrt()
    }

    pub fn clamped_fraction(&self) -> f64 {
        self.fits.iter().filter(|f| f.clamped).count() as f64 / self.fits.len() as f64
    }

    /// Fraction of estimates on `c = 0` or `c = 1`, clamped or stationary.
    pub fn boundary_fraction(&self) -> f64 {
        let on = |c: f64| c == 0.0 || c == 1.0;
        self.fits.iter().filter(|f| on(f.c_hat)).count() as f64 / self.fits.len() as f64
    }

    pub fn rms_error(&self, truth: f64) -> f64 {
        let ss: f64 = self.fits.iter().map(|f| (f.c_hat - truth).powi(2)).sum();
        (ss / self.fits.len() as f64).sqrt()
    }
}

/// Adds noise with each seed in turn and fits `c`.
pub fn seed_ensemble(
    clean: &DecayCurve,
    gamma: &[f64],
    method: Method,
    noise_sigma: f64,
    seeds: &[u64],
    exec: Execution,
) -> Result<Ensemble> {
    if seeds.len() < 2 {
        return Err(Error::InvalidParameter("an ensemble needs at least two seeds".into()));
    }
    let fits = exec.try_map(seeds.len(), |i| {
        fit_point(&add_measurement_noise(clean, noise_sigma, seeds[i])?, gamma, method)
    })?;
    Ok(Ensemble {
        seeds: seeds.to_vec(),
        fits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointFit {
    pub gamma: Vec<f64>,
    pub c_hat: f64,
    pub residual_rms: f64,
    pub iterations: u64,
}

struct Joint<'p, 'a>(&'p Problem<'a>);

impl Joint<'_, '_> {
    fn unpack(p: &[f64]) -> (Vec<f64>, f64, f64) {
        let (logs, c) = p.split_at(p.len() - 1);
        let c = c[0];
        let cc = c.clamp(0.0, 1.0);
        (logs.iter().map(|l| l.exp()).collect(), cc, c - cc)
    }
}

impl CostFunction for Joint<'_, '_> {
    type Param = Vec<f64>;
    type Output = f64;
    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let (gamma, c, excess) = Self::unpack(p);
        let q = Problem { gamma: &gamma, ..self.0.clone() };
        Ok(q.objective(c) + 1e3 * excess * excess)
    }
}

/// Fits the rates together with `c` by Nelder-Mead over `(ln gamma, c)`,
/// starting from `gamma_init` and `c = 0.5`.
pub fn fit_joint(curve: &DecayCurve, gamma_init: &[f64], method: Method) -> Result<JointFit> {
    let problem = Problem::new(curve, gamma_init, method)?;
    if gamma_init.iter().any(|&g| g <= 0.0) {
        return Err(Error::InvalidParameter("joint fit needs positive starting rates".into()));
    }
    let mut start: Vec<f64> = gamma_init.iter().map(|g| g.ln()).collect();
    start.push(0.5);
    let mut simplex = vec![start.clone()];
    for i in 0..start.len() {
        let mut v = start.clone();
        v[i] += if i + 1 == start.len() { 0.2 } else { 0.1 };
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-14)
        .map_err(|e| Error::Optimizer(e.to_string()))?;
    let res = Executor::new(Joint(&problem), solver)
        .configure(|s| s.max_iters(5000))
        .timer(false)
        .run()
        .map_err(|e| Error::Optimizer(e.to_string()))?;
    let best = res.state().get_best_param().ok_or_else(|| Error::Optimizer("no estimate".into()))?;
    let (gamma, c, _) = Joint::unpack(best);
    let q = Problem { gamma: &gamma, ..problem.clone() };
    Ok(JointFit {
        residual_rms: q.residual_rms(c),
        gamma,
        c_hat: c,
        iterations: res.state().get_iter(),
    })
}
