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

//! End-to-end runs of the command surface through [`run`], in-process and
//! with every path made absolute.

use std::path::Path;
use std::sync::RwLock;

use qnp::estimate::model_value;
use qnp::nmrsim::{dq_closed_form, SpinSystem};
use qnp::Method;

use crate::io::{parse_csv, parse_json};
use crate::run;

/// Runs hold a read lock; the test that sets `QNP_SEED` takes the write lock.
static ENV: RwLock<()> = RwLock::new(());

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

/// Runs `qnp args` as if from `dir`: relative path arguments are joined
/// onto it, and `--output` defaults to `dir/qnp-out`.
fn qnp(dir: &Path, args: &[&str]) -> Output {
    let _guard = ENV.read().unwrap_or_else(|e| e.into_inner());
    qnp_unlocked(dir, args)
}

fn qnp_unlocked(dir: &Path, args: &[&str]) -> Output {
    let mut full: Vec<String> = vec!["qnp".into()];
    let mut after_path_flag = false;
    for (i, a) in args.iter().enumerate() {
        let is_input = i == 1 && args[0] == "fit";
        if after_path_flag || is_input {
            full.push(dir.join(a).display().to_string());
        } else {
            full.push(a.to_string());
        }
        after_path_flag = matches!(*a, "--output" | "--config");
    }
    let sub = args.first().copied().unwrap_or("");
    if sub == "simulate" && !args.contains(&"--output") && !args.contains(&"--config") {
        full.push("--output".into());
        full.push(dir.join("qnp-out").display().to_string());
    }
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(full, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8_lossy(&out).into_owned(),
        stderr: String::from_utf8_lossy(&err).into_owned(),
    }
}

fn stdout(o: &Output) -> String {
    o.stdout.clone()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn gamma() -> Vec<f64> {
    SpinSystem::acetyl_chloride().gamma()
}

#[test]
fn simulate_writes_one_curve_per_c() {
    let d = tempfile::tempdir().unwrap();
    let o = qnp(d.path(), &["simulate", "--method", "qec", "--c", "0,0.5,1", "--t", "0:0.32:33", "--output", "out"]);
    assert_eq!(o.code, (0), "{}", &o.stderr);
    for (name, c) in [("qec_c0.csv", 0.0), ("qec_c0.5.csv", 0.5), ("qec_c1.csv", 1.0)] {
        let curve = parse_csv(&read(&d.path().join("out"), name), Method::Qec).unwrap();
        assert_eq!(curve.len(), 33);
        assert!((curve.points()[0].value - 1.0).abs() < 1e-12);
        for p in curve.points() {
            assert!((p.value - model_value(Method::Qec, &gamma(), c, p.t)).abs() < 1e-9);
        }
    }
}

#[test]
fn default_config_gives_three_reference_curves() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(qnp(d.path(), &["simulate"]).code, 0);
    let mut names: Vec<String> = std::fs::read_dir(d.path().join("qnp-out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["qec_c0.5.csv", "qec_c0.csv", "qec_c1.csv"]);
}

#[test]
fn dq_simulation_matches_closed_form() {
    let d = tempfile::tempdir().unwrap();
    let o = qnp(d.path(), &["simulate", "--method", "dq", "--c", "0.3", "--format", "json", "--output", "."]);
    assert_eq!(o.code, 0);
    let curve = parse_json(&read(d.path(), "dq_c0.3.json")).unwrap();
    assert_eq!(curve.method, Method::Dq);
    assert_eq!(curve.metadata.c, Some(0.3));
    let g = gamma();
    for p in curve.points() {
        assert!((p.value - dq_closed_form(g[0], g[1], 0.3, p.t)).abs() < 1e-10);
    }
}

#[test]
fn noiseless_fit_recovers_c() {
    let d = tempfile::tempdir().unwrap();
    qnp(d.path(), &["simulate", "--c", "0.5", "--t", "0:0.32:10", "--output", "."]);
    let o = qnp(d.path(), &["fit", "qec_c0.5.csv", "--format", "json"]);
    assert_eq!(o.code, (0), "{}", &o.stderr);
    assert!(stdout(&o).contains("c_hat = 0.500000"));
    let report: serde_json::Value = serde_json::from_str(&read(d.path(), "qec_c0.5.fit.json")).unwrap();
    let c_hat = report["c_hat"].as_f64().unwrap();
    assert!((c_hat - 0.5).abs() < 1e-4);
    assert!(report["ci_high"].as_f64().unwrap() - report["ci_low"].as_f64().unwrap() < 1e-4);
}

#[test]
fn json_curve_fit_uses_embedded_method() {
    let d = tempfile::tempdir().unwrap();
    qnp(d.path(), &["simulate", "--method", "dq", "--c", "0.7", "--t", "0:0.32:10", "--format", "json", "--output", "."]);
    let o = qnp(d.path(), &["fit", "dq_c0.7.json", "--output", "r.csv"]);
    assert_eq!(o.code, (0), "{}", &o.stderr);
    let report = read(d.path(), "r.csv");
    let row: Vec<&str> = report.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "dq");
    assert!((row[1].parse::<f64>().unwrap() - 0.7).abs() < 1e-5);
}

#[test]
fn end_to_end_pipeline_over_reference_seeds() {
    let d = tempfile::tempdir().unwrap();
    let mut estimates = Vec::new();
    for seed in 0..20 {
        let dir = d.path().join(format!("s{seed}"));
        let out = dir.to_str().unwrap();
        let s = seed.to_string();
        let args = ["simulate", "--c", "0.5", "--t", "0:0.32:10", "--noise-sigma", "0.01", "--seed", &s, "--output", out];
        assert_eq!(qnp(d.path(), &args).code, 0);
        let input = dir.join("qec_c0.5.csv");
        let o = qnp(d.path(), &["fit", input.to_str().unwrap(), "--format", "json", "--bootstrap", "100"]);
        assert_eq!(o.code, 0);
        let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("qec_c0.5.fit.json")).unwrap()).unwrap();
        estimates.push(r["c_hat"].as_f64().unwrap());
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    assert!((0.3..=0.7).contains(&mean), "mean {mean}, {estimates:?}");
}

#[test]
fn malformed_csv_is_a_parse_error_without_output() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.csv"), "t_seconds,value,sigma\n0,1,0\n0.1,oops,0\n").unwrap();
    let o = qnp(d.path(), &["fit", "bad.csv"]);
    assert_eq!(o.code, 3);
    assert!(!d.path().join("bad.fit.csv").exists());
    assert_eq!(qnp(d.path(), &["fit", "missing.csv"]).code, 3);
}

#[test]
fn degenerate_curve_is_a_fit_failure() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("flat.csv"), "t_seconds,value,sigma\n0,1,0\n").unwrap();
    assert_eq!(qnp(d.path(), &["fit", "flat.csv"]).code, 4);
    std::fs::write(d.path().join("empty.csv"), "t_seconds,value,sigma\n").unwrap();
    assert_eq!(qnp(d.path(), &["fit", "empty.csv"]).code, 4);
}

#[test]
fn validate_passes_and_as_printed_table_fails() {
    let d = tempfile::tempdir().unwrap();
    let o = qnp(d.path(), &["validate", "--samples", "100000", "--seed", "7"]);
    assert_eq!(o.code, (0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("PASS mc-convergence")));
    assert_eq!(text.lines().filter(|l| l.starts_with("FAIL")).count(), 0);

    let o = qnp(d.path(), &["validate", "--table-as-printed"]);
    assert_eq!(o.code, 1);
    let line = stdout(&o).lines().find(|l| l.contains("table-trace-preservation")).unwrap().to_string();
    assert!(line.starts_with("FAIL"));
    let err: f64 = line.rsplit(" to ").next().unwrap().trim().parse().unwrap();
    assert!(err < 1e-12, "{line}");
}

#[test]
fn kraus_table_reports_both_variants() {
    let d = tempfile::tempdir().unwrap();
    let o = qnp(d.path(), &["kraus-table", "--c", "0.8", "--t", "0.05:0.2:4", "--format", "json"]);
    assert_eq!(o.code, 0);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 8);
    let g = gamma();
    for r in rows {
        let t = r["t_seconds"].as_f64().unwrap();
        let x = 2.0 * 0.8 * t * (g[0] * g[1]).sqrt();
        let expect = match r["variant"].as_str().unwrap() {
            "corrected" => 1.0,
            _ => 1.0 + (-(g[0] + g[1]) * t).exp() * x.sinh(),
        };
        assert!((r["sum"].as_f64().unwrap() - expect).abs() < 1e-12);
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let d = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "method": "dq",
        "c": [0.2],
        "grid": {"start": 0, "stop": 0.1, "count": 3},
        "output": d.path().join("cfg-out"),
    });
    std::fs::write(d.path().join("run.json"), cfg.to_string()).unwrap();
    assert_eq!(qnp(d.path(), &["simulate", "--config", "run.json"]).code, 0);
    assert!(d.path().join("cfg-out/dq_c0.2.csv").exists());
    assert_eq!(qnp(d.path(), &["simulate", "--config", "run.json", "--method", "qec"]).code, 0);
    let qec = parse_csv(&read(d.path(), "cfg-out/qec_c0.2.csv"), Method::Qec).unwrap();
    assert_eq!(qec.len(), 3);

    std::fs::write(d.path().join("bad.json"), r#"{"grid": {"start": 0, "stop": 0.1, "count": 1}}"#).unwrap();
    let o = qnp(d.path(), &["simulate", "--config", "bad.json"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("grid"));
    std::fs::write(d.path().join("typo.json"), r#"{"sigma": 0.1}"#).unwrap();
    assert_eq!(qnp(d.path(), &["simulate", "--config", "typo.json"]).code, 2);
    assert_eq!(qnp(d.path(), &["simulate", "--t", "0:1"]).code, 2);
}

#[test]
fn seed_env_fallback_matches_flag() {
    let d = tempfile::tempdir().unwrap();
    let a = ["simulate", "--c", "0.5", "--noise-sigma", "0.01", "--seed", "11", "--output", "a"];
    assert_eq!(qnp(d.path(), &a).code, 0);
    let o = {
        let _guard = ENV.write().unwrap_or_else(|e| e.into_inner());
        std::env::set_var("QNP_SEED", "11");
        let o = qnp_unlocked(d.path(), &["simulate", "--c", "0.5", "--noise-sigma", "0.01", "--output", "b"]);
        std::env::remove_var("QNP_SEED");
        o
    };
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(read(d.path(), "a/qec_c0.5.csv"), read(d.path(), "b/qec_c0.5.csv"));
    let c = ["simulate", "--c", "0.5", "--noise-sigma", "0.01", "--seed", "12", "--output", "c"];
    qnp(d.path(), &c);
    assert_ne!(read(d.path(), "a/qec_c0.5.csv"), read(d.path(), "c/qec_c0.5.csv"));
}

#[test]
fn outputs_are_byte_identical_across_threads() {
    let d = tempfile::tempdir().unwrap();
    for (dir, threads) in [("t1", "1"), ("t4", "4"), ("t4b", "4")] {
        let args = ["simulate", "--c", "0,0.5,1", "--noise-sigma", "0.01", "--seed", "5", "--threads", threads, "--output", dir];
        assert_eq!(qnp(d.path(), &args).code, 0);
        let fit = ["fit", "qec_c0.5.csv", "--threads", threads, "--format", "json"];
        assert_eq!(qnp(&d.path().join(dir), &fit).code, 0);
    }
    for name in ["qec_c0.csv", "qec_c0.5.csv", "qec_c1.csv"] {
        let a = read(d.path(), &format!("t1/{name}"));
        assert_eq!(a, read(d.path(), &format!("t4/{name}")), "{name}");
        assert_eq!(a, read(d.path(), &format!("t4b/{name}")), "{name}");
    }
    // Reports differ only in the input path they echo back.
    let report = |dir: &str| {
        let mut v: serde_json::Value = serde_json::from_str(&read(d.path(), &format!("{dir}/qec_c0.5.fit.json"))).unwrap();
        v["input"].take();
        v.to_string()
    };
    assert_eq!(report("t1"), report("t4"));
    assert_eq!(report("t1"), report("t4b"));
}

#[test]
fn help_and_usage_errors() {
    let d = tempfile::tempdir().unwrap();
    let o = qnp(d.path(), &["--help"]);
    assert_eq!(o.code, 0);
    assert!(stdout(&o).contains("kraus-table"));
    assert_eq!(qnp(d.path(), &["frobnicate"]).code, 2);
}
