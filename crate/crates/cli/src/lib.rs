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

//! Library behind the `qnp` binary: argument parsing, configuration and the
//! four subcommands. [`run`] returns the process exit code.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

#[cfg(test)]
mod tests;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qnp::{Method, TimeGrid};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "qnp", version, about = "Correlated dephasing noise: simulation, QEC probes and correlation fitting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write decay curves for each requested correlation factor.
    Simulate(Common),
    /// Fit the correlation factor of a curve file.
    Fit(FitArgs),
    /// Run the oracle-equivalence checks.
    Validate(Common),
    /// Print corrected and as-printed pair weights.
    KrausTable(Common),
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Measurement method: `qec` or `dq`.
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Correlation factors, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub c: Option<Vec<f64>>,
    /// Inclusive time grid in seconds.
    #[arg(long = "t", value_name = "START:STOP:COUNT", value_parser = parse_grid)]
    pub grid: Option<TimeGrid>,
    /// Absolute Gaussian noise added to curve values.
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[arg(long, env = "QNP_SEED")]
    pub seed: Option<u64>,
    /// Monte Carlo samples for `validate`.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output directory (simulate) or report file (fit).
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Use the pair weights exactly as originally tabulated.
    #[arg(long)]
    pub table_as_printed: bool,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Curve file (`.csv` or `.json`).
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
    /// Bootstrap replicas.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Also fit the rates jointly with c.
    #[arg(long)]
    pub joint: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: qnp::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<TimeGrid, String> {
    s.parse().map_err(|e: qnp::Error| e.to_string())
}

impl Common {
    /// Config file (or defaults) with these flags applied on top.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if let Some(c) = &self.c {
            cfg.c = c.clone();
        }
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        if let Some(s) = self.noise_sigma {
            cfg.noise_sigma = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.samples {
            cfg.samples = n;
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        cfg.table_as_printed |= self.table_as_printed;
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        Ok(cfg)
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match commands::dispatch(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "qnp: {e}");
            e.exit_code()
        }
    }
}

pub(crate) fn io_error(what: &str, e: std::io::Error) -> CliError {
    CliError::Config(format!("{what}: {e}"))
}
