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

//! JSON run configuration. Every field is optional; command-line flags
//! override whatever the file sets.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qnp::nmrsim::SpinSystem;
use qnp::{Method, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

/// Spin parameters; rates are `1 / T2` in 1/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinConfig {
    pub gamma: Vec<f64>,
    pub offsets_hz: Vec<f64>,
    pub j_hz: Vec<Vec<f64>>,
}

impl Default for SpinConfig {
    fn default() -> Self {
        let s = SpinSystem::acetyl_chloride();
        Self {
            gamma: s.gamma(),
            offsets_hz: s.offsets_hz().to_vec(),
            j_hz: s.j_rows(),
        }
    }
}

impl SpinConfig {
    pub fn to_system(&self) -> CliResult<SpinSystem> {
        if let Some(g) = self.gamma.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(CliError::Config(format!("spins.gamma: rate {g} must be finite and > 0")));
        }
        SpinSystem::new(
            self.offsets_hz.clone(),
            &self.j_hz,
            self.gamma.iter().map(|g| 1.0 / g).collect(),
        )
        .map_err(|e| CliError::Config(format!("spins: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub spins: SpinConfig,
    pub method: Method,
    pub c: Vec<f64>,
    pub grid: TimeGrid,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Monte Carlo samples used by `validate`.
    pub samples: usize,
    pub bootstrap: usize,
    pub output: PathBuf,
    pub format: Format,
    pub table_as_printed: bool,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spins: SpinConfig::default(),
            method: Method::Qec,
            c: vec![0.0, 0.5, 1.0],
            grid: TimeGrid { start: 0.0, stop: 0.32, count: 33 },
            noise_sigma: 0.0,
            seed: 0,
            samples: 100_000,
            bootstrap: 200,
            output: PathBuf::from("qnp-out"),
            format: Format::Csv,
            table_as_printed: false,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    /// Checks every invariant and builds the spin system.
    pub fn validate(&self) -> CliResult<SpinSystem> {
        let sys = self.spins.to_system()?;
        self.grid.validate().map_err(|e| CliError::Config(format!("grid: {e}")))?;
        if self.c.is_empty() {
            return Err(CliError::Config("c: at least one correlation factor is required".into()));
        }
        if let Some(c) = self.c.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(CliError::Config(format!("c: {c} is outside [0, 1]")));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(CliError::Config(format!("noise_sigma: {} must be >= 0", self.noise_sigma)));
        }
        if self.samples == 0 {
            return Err(CliError::Config("samples: must be >= 1".into()));
        }
        if self.bootstrap < 100 {
            return Err(CliError::Config(format!("bootstrap: {} replicas, need >= 100", self.bootstrap)));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads: must be >= 1".into()));
        }
        let need = self.method.rate_count();
        if sys.n_spins() < need {
            return Err(CliError::Config(format!(
                "spins: method {} needs {need} spins, config has {}",
                self.method,
                sys.n_spins()
            )));
        }
        Ok(sys)
    }

    /// Known rates for the configured method.
    pub fn rates(&self) -> Vec<f64> {
        self.spins.gamma[..self.method.rate_count().min(self.spins.gamma.len())].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::default();
        let sys = cfg.validate().unwrap();
        assert_eq!(sys.n_spins(), 3);
        assert_eq!(cfg.rates().len(), 3);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"method": "dq", "c": [0.3]}"#).unwrap();
        assert_eq!(cfg.method, Method::Dq);
        assert_eq!(cfg.grid, RunConfig::default().grid);
        assert_eq!(cfg.rates().len(), 2);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"methd": "dq"}"#).is_err());
    }

    #[test]
    fn invariant_violations_are_named() {
        let mut cfg = RunConfig { c: vec![1.2], ..RunConfig::default() };
        assert!(cfg.validate().unwrap_err().to_string().contains("c: 1.2"));
        cfg.c = vec![0.5];
        cfg.grid.count = 1;
        assert!(cfg.validate().unwrap_err().to_string().contains("grid"));
        cfg.grid.count = 5;
        cfg.spins.gamma[1] = 0.0;
        assert!(cfg.validate().unwrap_err().to_string().contains("spins.gamma"));
    }
}
