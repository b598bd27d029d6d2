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

//! Curve files. CSV rows are `t_seconds,value,sigma` with 17 significant
//! digits; JSON holds the full curve object including metadata.

use std::path::Path;

use qnp::{CurvePoint, DecayCurve, Method};

use crate::config::Format;
use crate::error::{CliError, CliResult};

pub const CSV_HEADER: [&str; 3] = ["t_seconds", "value", "sigma"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn curve_to_csv(curve: &DecayCurve) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for p in curve.points() {
        out.push_str(&format!("{},{},{}\n", fmt_f64(p.t), fmt_f64(p.value), fmt_f64(p.sigma)));
    }
    out
}

pub fn curve_to_json(curve: &DecayCurve) -> String {
    let mut s = serde_json::to_string_pretty(curve).expect("curve serialises");
    s.push('\n');
    s
}

pub fn render_curve(curve: &DecayCurve, format: Format) -> String {
    match format {
        Format::Csv => curve_to_csv(curve),
        Format::Json => curve_to_json(curve),
    }
}

pub fn parse_csv(text: &str, method: Method) -> CliResult<DecayCurve> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| CliError::Parse(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::Parse(format!(
            "expected header `{}`, found `{}`",
            CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Parse(e.to_string()))?;
        let num = |i: usize| -> CliResult<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| CliError::Parse(format!("row {}: `{}` is not a number", line + 1, &rec[i])))
        };
        points.push(CurvePoint { t: num(0)?, value: num(1)?, sigma: num(2)? });
    }
    DecayCurve::new(method, points, Default::default()).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn parse_json(text: &str) -> CliResult<DecayCurve> {
    let raw: DecayCurve = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    // Deserialisation bypasses the constructor's checks.
    DecayCurve::new(raw.method, raw.points().to_vec(), raw.metadata.clone())
        .map_err(|e| CliError::Parse(e.to_string()))
}

/// Reads `.json` as a curve object and anything else as CSV tagged `method`.
pub fn read_curve(path: &Path, method: Method) -> CliResult<DecayCurve> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        parse_json(&text)
    } else {
        parse_csv(&text, method)
    }
}

/// `{method}_c{c}.{ext}`.
pub fn curve_file_name(method: Method, c: f64, format: Format) -> String {
    format!("{method}_c{c}.{}", format.extension())
}
