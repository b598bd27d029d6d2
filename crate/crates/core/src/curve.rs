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

//! Decay curves: ordered `(t, value, sigma)` samples tagged by readout method.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Entanglement fidelity of the three-qubit phase-flip code.
    Qec,
    /// Double-quantum coherence echo decay.
    Dq,
}

impl Method {
    /// Number of known relaxation rates the method's model needs.
    pub fn rate_count(self) -> usize {
        match self {
            Method::Qec => 3,
            Method::Dq => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Qec => "qec",
            Method::Dq => "dq",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qec" => Ok(Method::Qec),
            "dq" => Ok(Method::Dq),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurveMeta {
    /// Relaxation rates (1/s) the curve was generated with.
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub noise_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub method: Method,
    #[serde(default)]
    pub metadata: CurveMeta,
    points: Vec<CurvePoint>,
}

impl DecayCurve {
    /// Validates strictly increasing times, finite values and non-negative sigmas.
    pub fn new(method: Method, points: Vec<CurvePoint>, metadata: CurveMeta) -> Result<Self> {
        let ok_values = points
            .iter()
            .all(|p| p.t.is_finite() && p.value.is_finite() && p.sigma >= 0.0);
        let increasing = points.windows(2).all(|w| w[0].t < w[1].t);
        if !ok_values || !increasing {
            return Err(Error::MalformedCurve);
        }
        Ok(Self {
            method,
            metadata,
            points,
        })
    }

    /// Sorts by time first; duplicate times are still rejected.
    pub fn from_unsorted(
        method: Method,
        mut points: Vec<CurvePoint>,
        metadata: CurveMeta,
    ) -> Result<Self> {
        points.sort_by(|a, b| a.t.total_cmp(&b.t));
        Self::new(method, points, metadata)
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Same times and sigmas with replaced values.
    pub fn with_values(&self, values: &[f64]) -> Self {
        debug_assert_eq!(values.len(), self.points.len());
        let points = self
            .points
            .iter()
            .zip(values)
            .map(|(p, &value)| CurvePoint { value, ..*p })
            .collect();
        Self {
            method: self.method,
            metadata: self.metadata.clone(),
            points,
        }
    }

    pub(crate) fn map_points(&self, f: impl FnMut(&CurvePoint) -> CurvePoint) -> Self {
        Self {
            method: self.method,
            metadata: self.metadata.clone(),
            points: self.points.iter().map(f).collect(),
        }
    }
}

/// Inclusive grid `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        let g = Self { start, stop, count };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs count >= 2, got {}",
                self.count
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start < 0.0 || self.stop <= self.start {
            return Err(Error::InvalidParameter(format!(
                "time grid needs 0 <= start < stop, got {}:{}",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for TimeGrid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("time grid `{s}` is not START:STOP:COUNT"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Self::new(start, stop, count)
    }
}
