use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn blockmax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockmax"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name);
    let p = path.to_str().unwrap().to_string();
    let mut args = vec!["simulate", "--out", &p];
    args.extend_from_slice(extra);
    let o = blockmax(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    p
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--model", "armax-gpd", "--gamma", "0", "--beta", "0.5", "--n", "1000", "--seed", "7"];
    let a = blockmax(&args);
    let b = blockmax(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().next(), Some("value"));
    assert_eq!(text.lines().count(), 1001);
}

#[test]
fn simulate_rejects_beta_one() {
    let o = blockmax(&["simulate", "--model", "armax-gpd", "--beta", "1.0", "--n", "10"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("[0, 1)"), "{}", stderr(&o));
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(code(&blockmax(&["simulate", "--model", "nope", "--n", "5"])), 2);
    assert_eq!(code(&blockmax(&["frobnicate"])), 2);
}

#[test]
fn missing_file_is_io_error() {
    let o = blockmax(&["bootstrap-ci", "--data", "/nonexistent/x.csv", "--r", "10"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn unwritable_output_is_io_error() {
    let o = blockmax(&["simulate", "--model", "armax-gpd", "--n", "10", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn missing_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("gaps.csv");
    fs::write(&p, "value\n1\n\n2\nNA\n3\n").unwrap();
    let o = blockmax(&["fit", "--data", p.to_str().unwrap(), "--r", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("missing value"), "{}", stderr(&o));
}

#[test]
fn constant_series_mean_is_statistical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("flat.csv");
    fs::write(&p, format!("value\n{}", "5\n".repeat(400))).unwrap();
    let o = blockmax(&["bootstrap-ci", "--data", p.to_str().unwrap(), "--r", "10", "--target", "mean", "-B", "50"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("tied"), "{}", stderr(&o));
}

#[test]
fn naive_sliding_needs_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "s.csv", &["--model", "armax-gpd", "--n", "2000", "--seed", "1"]);
    let base = ["bootstrap-ci", "--data", &data, "--r", "20", "--target", "mean", "-B", "50", "--method", "naive-sliding"];
    let o = blockmax(&base);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("inconsistent"));
    let mut allowed = base.to_vec();
    allowed.push("--allow-inconsistent");
    let o = blockmax(&allowed);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
}

/// Every number in the text report appears with the same digits in JSON.
#[test]
fn text_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "s.csv", &["--model", "armax-gpd", "--gamma", "-0.2", "--beta", "0.5", "--n", "29200", "--seed", "3"]);
    let args = ["bootstrap-ci", "--data", &data, "--r", "365", "-B", "200", "--correction", "auto", "--seed", "5"];
    let text = blockmax(&args);
    assert_eq!(code(&text), 0, "{}", stderr(&text));
    let mut j = args.to_vec();
    j.push("--json");
    let json: Value = serde_json::from_slice(&blockmax(&j).stdout).unwrap();
    let mut seen = 0;
    for line in stdout(&text).lines() {
        let (k, v) = line.split_once(": ").unwrap();
        let jv = &json[k];
        match jv {
            Value::String(s) => assert_eq!(s, v),
            other => assert_eq!(other.to_string(), v, "{k}"),
        }
        seen += 1;
    }
    assert_eq!(seen + 1, json.as_object().unwrap().len());
    // the reported factor is the regression evaluated at the reported inputs
    let m = json["m"].as_u64().unwrap() as f64;
    let g = json["shape_estimate"].as_f64().unwrap();
    let c = json["correction_factor"].as_f64().unwrap();
    assert_eq!(m, 80.0);
    assert!((c - (2.48 - 0.01 * m + 0.68 * g).max(1.0)).abs() < 1e-5);
}

#[test]
fn correction_factor_reported_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "s.csv", &["--model", "armax-gpd", "--n", "8000", "--seed", "2"]);
    let o = blockmax(&["bootstrap-ci", "--data", &data, "--r", "100", "-B", "40", "--correction", "factor", "--factor", "1.544", "--json"]);
    let json: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["correction_factor"].as_f64(), Some(1.544));
}

#[test]
fn bootstrap_output_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "s.csv", &["--model", "armax-pareto", "--alpha", "2", "--n", "5000", "--seed", "4"]);
    let run = |t: &str| {
        blockmax(&["--threads", t, "bootstrap-ci", "--data", &data, "--r", "50", "-B", "100", "--target", "frechet-shape", "--json"]).stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn blocks_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "s.csv", &["--model", "armax-gpd", "--n", "1000", "--seed", "9"]);
    let o = blockmax(&["blocks", "--data", &data, "--method", "circular", "--r", "10", "--k", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 1001);
    let o = blockmax(&["blocks", "--data", &data, "--method", "disjoint", "--r", "10"]);
    assert_eq!(stdout(&o).lines().count(), 101);
    let o = blockmax(&["blocks", "--data", &data, "--method", "circular", "--r", "10", "--compressed"]);
    let total: u64 = stdout(&o).lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 1000);
    let o = blockmax(&["fit", "--data", &data, "--r", "10", "--period", "100", "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(json["scale"].as_f64().unwrap() > 0.0);
    assert!(json["return_level"].as_f64().unwrap() > json["loc"].as_f64().unwrap());
}

#[test]
fn experiment_smoke_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("exp.txt");
    fs::write(&spec, "model = armax-gpd\nr = 10\nm = 20\nmethods = disjoint, sliding\nreplications = 2\nreplicates = 20\nseed = 1\n").unwrap();
    let start = std::time::Instant::now();
    let a = blockmax(&["experiment", spec.to_str().unwrap()]);
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = blockmax(&["experiment", spec.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("# blockmax "));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "method,m,mse,variance,bias_sq,coverage,avg_width,rel_mse,rel_width");
    assert_eq!(body.len(), 3);
}

#[test]
fn experiment_unknown_key() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("exp.txt");
    fs::write(&spec, "model = armax-gpd\nr = 10\nm = 20\nmethods = sliding\nreplications = 2\nflavour = mint\n").unwrap();
    let o = blockmax(&["experiment", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("flavour"));
}

#[test]
fn window_scan_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "s.csv", &["--model", "armax-gpd", "--gamma", "0.1", "--n", "3000", "--seed", "5"]);
    let o = blockmax(&["window-scan", "--data", &data, "--r", "50", "--window", "40", "--target", "mean", "-B", "40"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("window_end_index,target,method,estimate,lower,upper,width"));
    // 60 blocks, window 40, two methods
    assert_eq!(text.lines().count() - 1, 2 * 21);
    let o = blockmax(&["window-scan", "--data", &data, "--r", "50", "--window", "61"]);
    assert_eq!(code(&o), 2);
}

fn scan_rows(data: &str, dir: &Path, extra: &[&str]) -> Vec<Vec<String>> {
    let out = dir.join("scan.csv");
    let mut args = vec!["window-scan", "--data", data, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = blockmax(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

/// Return-level widths of sliding-circular intervals are on average no wider
/// than the disjoint ones.
#[test]
fn window_scan_sliding_narrower() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "s.csv", &["--model", "armax-gpd", "--gamma", "0.1", "--beta", "0.3", "--n", "36500", "--seed", "8"]);
    let rows = scan_rows(&data, dir.path(), &["--r", "365", "--window", "40", "--step", "5", "-B", "200"]);
    let mean_width = |m: &str| {
        let w: Vec<f64> = rows.iter().filter(|r| r[2] == m).map(|r| r[6].parse().unwrap()).collect();
        w.iter().sum::<f64>() / w.len() as f64
    };
    assert!(mean_width("sliding-circular") <= mean_width("disjoint"));
}

/// On a stationary series the per-window estimates show no linear trend:
/// slope t-test on non-overlapping windows, not significant at 1%.
#[test]
fn window_scan_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "s.csv", &["--model", "armax-gpd", "--gamma", "0.1", "--n", "73000", "--seed", "8"]);
    let rows = scan_rows(
        &data,
        dir.path(),
        &["--r", "365", "--window", "20", "--step", "20", "-B", "20", "--method", "sliding-circular"],
    );
    let est: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(est.len(), 10);
    let n = est.len() as f64;
    let t: Vec<f64> = (0..est.len()).map(|i| i as f64).collect();
    let (tm, ym) = (t.iter().sum::<f64>() / n, est.iter().sum::<f64>() / n);
    let stt: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
    let slope = t.iter().zip(&est).map(|(a, b)| (a - tm) * (b - ym)).sum::<f64>() / stt;
    let resid: f64 = t.iter().zip(&est).map(|(a, b)| (b - ym - slope * (a - tm)).powi(2)).sum();
    let se = (resid / (n - 2.0) / stt).sqrt();
    // two-sided 1% critical value of Student's t with 8 degrees of freedom
    assert!((slope / se).abs() < 3.355, "t = {}", slope / se);
}
