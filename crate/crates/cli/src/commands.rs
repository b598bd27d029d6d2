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

use std::io::Write;
use std::path::{Path, PathBuf};

use qnp::dephase::{PairWeights, TableVariant};
use qnp::estimate::{
    add_measurement_noise, bootstrap_ci_with, engineered_curve_with, fit_joint, CurveSource, FitResult, JointFit,
};
use qnp::{DecayCurve, Execution, Method};
use serde::Serialize;

use crate::checks::{run_suite, SuiteOptions};
use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io::{curve_file_name, fmt_f64, read_curve, render_curve};
use crate::{io_error, Command, FitArgs};

/// Text for stdout plus the error that decides the exit code, if any.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub error: Option<CliError>,
}

impl From<String> for Outcome {
    fn from(stdout: String) -> Self {
        Self { stdout, error: None }
    }
}

pub fn dispatch(cmd: &Command, out: &mut dyn Write) -> CliResult<()> {
    let outcome = match cmd {
        Command::Simulate(c) => {
            let cfg = c.resolve()?;
            with_threads(cfg.threads, |exec| simulate(&cfg, exec))??
        }
        Command::Fit(args) => {
            let cfg = args.common.resolve()?;
            with_threads(cfg.threads, |exec| fit(args, cfg.clone(), exec))??
        }
        Command::Validate(c) => {
            let cfg = c.resolve()?;
            with_threads(cfg.threads, |exec| validate(&cfg, exec))??
        }
        Command::KrausTable(c) => kraus_table(&c.resolve()?)?,
    };
    out.write_all(outcome.stdout.as_bytes()).map_err(|e| io_error("stdout", e))?;
    match outcome.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Runs `f` on a pool of `threads` workers, or sequentially for one thread.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce(Execution) -> R + Send) -> CliResult<R> {
    match threads {
        Some(0) => Err(CliError::Config("threads: must be >= 1".into())),
        Some(1) => Ok(f(Execution::Sequential)),
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("threads: {e}")))?;
            Ok(pool.install(|| f(Execution::Parallel)))
        }
        _ => Ok(f(Execution::default())),
    }
}

pub fn simulate(cfg: &RunConfig, exec: Execution) -> CliResult<Outcome> {
    let sys = cfg.validate()?;
    let times = cfg.grid.points();
    let variant = if cfg.table_as_printed { TableVariant::AsPrinted } else { TableVariant::Corrected };
    // Build every curve before touching the filesystem.
    let curves = cfg
        .c
        .iter()
        .enumerate()
        .map(|(i, &c)| -> CliResult<DecayCurve> {
            let curve = engineered_curve_with(cfg.method, &sys, c, &times, CurveSource::Engineered(variant), exec)?;
            if cfg.noise_sigma > 0.0 {
                Ok(add_measurement_noise(&curve, cfg.noise_sigma, cfg.seed.wrapping_add(i as u64))?)
            } else {
                Ok(curve)
            }
        })
        .collect::<CliResult<Vec<_>>>()?;
    std::fs::create_dir_all(&cfg.output).map_err(|e| io_error(&format!("output {}", cfg.output.display()), e))?;
    let mut text = String::new();
    for (curve, &c) in curves.iter().zip(&cfg.c) {
        let path = cfg.output.join(curve_file_name(cfg.method, c, cfg.format));
        std::fs::write(&path, render_curve(curve, cfg.format)).map_err(|e| io_error(&path.display().to_string(), e))?;
        text.push_str(&format!("wrote {} ({} points, c = {c})\n", path.display(), curve.len()));
    }
    Ok(text.into())
}

#[derive(Debug, Serialize)]
pub struct FitReport {
    pub input: String,
    pub rates: Vec<f64>,
    #[serde(flatten)]
    pub fit: FitResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointFit>,
}

fn fit_error(e: qnp::Error) -> CliError {
    use qnp::Error as E;
    match e {
        E::RateCount { .. } | E::TooFewReplicas { .. } | E::InvalidParameter(_) => CliError::Config(e.to_string()),
        other => CliError::Fit(other.to_string()),
    }
}

fn report_path(input: &Path, explicit: Option<&PathBuf>, format: Format) -> PathBuf {
    match explicit {
        Some(p) => p.clone(),
        None => input.with_extension(format!("fit.{}", format.extension())),
    }
}

pub fn fit(args: &FitArgs, mut cfg: RunConfig, exec: Execution) -> CliResult<Outcome> {
    if let Some(n) = args.bootstrap {
        cfg.bootstrap = n;
    }
    let curve = read_curve(&args.input, cfg.method)?;
    // A JSON curve carries its own method unless the flag says otherwise.
    let method: Method = args.common.method.unwrap_or(curve.method);
    cfg.method = method;
    cfg.validate()?;
    let rates = cfg.rates();
    let fit = bootstrap_ci_with(&curve, &rates, method, cfg.bootstrap, cfg.seed, exec).map_err(fit_error)?;
    let joint = if args.joint {
        Some(fit_joint(&curve, &rates, method).map_err(fit_error)?)
    } else {
        None
    };
    let path = report_path(&args.input, args.common.output.as_ref(), cfg.format);
    let report = FitReport {
        input: args.input.display().to_string(),
        rates,
        fit,
        joint,
    };
    let body = match cfg.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serialises");
            s.push('\n');
            s
        }
        Format::Csv => {
            let f = &report.fit;
            format!(
                "method,c_hat,ci_low,ci_high,residual_rms,n_bootstrap,clamped,seed\n{},{},{},{},{},{},{},{}\n",
                f.method,
                fmt_f64(f.c_hat),
                fmt_f64(f.ci_low),
                fmt_f64(f.ci_high),
                fmt_f64(f.residual_rms),
                f.n_bootstrap,
                f.clamped,
                f.seed
            )
        }
    };
    std::fs::write(&path, body).map_err(|e| io_error(&path.display().to_string(), e))?;
    let f = &report.fit;
    let mut text = format!(
        "{method}: c_hat = {:.6}  68% CI [{:.6}, {:.6}]  residual rms {:.3e}  bootstrap {}{}\n",
        f.c_hat,
        f.ci_low,
        f.ci_high,
        f.residual_rms,
        f.n_bootstrap,
        if f.clamped { "  (clamped)" } else { "" }
    );
    if let Some(j) = &report.joint {
        text.push_str(&format!(
            "joint: c_hat = {:.6}  rates {:?}  residual rms {:.3e}\n",
            j.c_hat, j.gamma, j.residual_rms
        ));
    }
    text.push_str(&format!("report: {}\n", path.display()));
    Ok(text.into())
}

pub fn validate(cfg: &RunConfig, exec: Execution) -> CliResult<Outcome> {
    let sys = cfg.validate()?;
    if sys.n_spins() < 3 {
        return Err(CliError::Config("spins: validation needs three spins".into()));
    }
    let opts = SuiteOptions {
        spins: sys,
        table: if cfg.table_as_printed { TableVariant::AsPrinted } else { TableVariant::Corrected },
        samples: cfg.samples,
        seed: cfg.seed,
        exec,
    };
    let checks = run_suite(&opts)?;
    let mut text = String::new();
    for c in &checks {
        text.push_str(&format!(
            "{} {:<26} max deviation {:.3e} (tolerance {:.1e})  {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.max_deviation,
            c.tolerance,
            c.note
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    text.push_str(&format!("{} of {} checks passed\n", checks.len() - failed, checks.len()));
    Ok(Outcome {
        stdout: text,
        error: (failed > 0).then_some(CliError::Validation(failed)),
    })
}

#[derive(Debug, Serialize)]
struct WeightRow {
    variant: &'static str,
    c: f64,
    t_seconds: f64,
    p_i: f64,
    p_z1: f64,
    p_z2: f64,
    p_z1z2: f64,
    p_rot_plus: f64,
    p_rot_minus: f64,
    sum: f64,
}

pub fn kraus_table(cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    let g = &cfg.spins.gamma;
    let mut rows = Vec::new();
    for &c in &cfg.c {
        for t in cfg.grid.points() {
            for (variant, name) in [(TableVariant::Corrected, "corrected"), (TableVariant::AsPrinted, "as-printed")] {
                let w = PairWeights::from_rates(g[0], g[1], c, t, variant);
                rows.push(WeightRow {
                    variant: name,
                    c,
                    t_seconds: t,
                    p_i: w.identity,
                    p_z1: w.z_first,
                    p_z2: w.z_second,
                    p_z1z2: w.z_both,
                    p_rot_plus: w.rotation,
                    p_rot_minus: w.rotation,
                    sum: w.sum(),
                });
            }
        }
    }
    let text = match cfg.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("rows serialise");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("variant,c,t_seconds,p_i,p_z1,p_z2,p_z1z2,p_rot_plus,p_rot_minus,sum\n");
            for r in &rows {
                let nums = [r.c, r.t_seconds, r.p_i, r.p_z1, r.p_z2, r.p_z1z2, r.p_rot_plus, r.p_rot_minus, r.sum];
                let nums: Vec<String> = nums.iter().map(|&x| fmt_f64(x)).collect();
                s.push_str(&format!("{},{}\n", r.variant, nums.join(",")));
            }
            s
        }
    };
    Ok(text.into())
}
