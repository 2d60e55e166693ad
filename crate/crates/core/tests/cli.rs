use std::process::Command;

use pt_spectra::cli::{format_number, run};
use serde_json::Value;

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pt-spectra"))
        .args(args)
        .env_remove("PT_SPECTRA_TOL")
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn call(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("pt-spectra").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).expect("valid json")
}

fn num(v: &Value) -> f64 {
    v.as_f64().or_else(|| v.to_string().parse().ok()).expect("number")
}

#[test]
fn hard_spectrum_json() {
    let (code, out, _) = bin(&["spectrum-hard", "--g", "12.31", "--count", "5", "--format", "json"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    let want = [7.03165, 7.1848, 21.7217, 39.1884, 61.4929];
    assert_eq!(rows.len(), 5);
    for (r, w) in rows.iter().zip(want) {
        assert!((num(&r["E"]["re"]) - w).abs() < 1e-3);
        assert_eq!(num(&r["E"]["im"]), 0.0);
    }
}

#[test]
fn free_box_levels() {
    let (code, out) = call(&["spectrum-hard", "--g", "0", "--count", "3"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let got: Vec<f64> = v["rows"].as_array().unwrap().iter().map(|r| num(&r["E"]["re"])).collect();
    for (g, w) in got.iter().zip([2.4674011, 9.8696044, 22.2066099]) {
        assert!((g - w).abs() < 1e-7);
    }
}

#[test]
fn critical_record() {
    let (code, out) = call(&["critical", "--system", "hard", "--g-min", "12", "--g-max", "13"]);
    assert_eq!(code, 0);
    let r = &json(&out)["rows"][0];
    assert!((num(&r["g_c"]) - 12.31246).abs() < 1e-4);
    assert!((num(&r["E_c"]) - 7.109).abs() < 1e-2);
}

#[test]
fn json_round_trips() {
    for args in [
        &["spectrum-hard", "--g", "12.32", "--count", "5"][..],
        &["spectrum-soft", "--g", "0.1"],
        &["matrix", "--g", "54", "--n", "20"],
        &["reflectionless", "--g", "1", "--e-max", "5", "--step", "0.05"],
    ] {
        let (code, out) = call(args);
        assert_eq!(code, 0);
        let again = serde_json::to_string_pretty(&json(&out)).unwrap() + "\n";
        assert_eq!(again, out, "{args:?}");
    }
}

#[test]
fn deterministic_output() {
    let args = ["sweep", "--system", "hard", "--g-min", "12", "--g-max", "12.5", "--g-step", "0.05", "--count", "3"];
    assert_eq!(call(&args), call(&args));
}

#[test]
fn csv_and_json_carry_same_numbers() {
    let (_, j) = call(&["spectrum-hard", "--g", "12.32", "--count", "5"]);
    let (_, c) = call(&["spectrum-hard", "--g", "12.32", "--count", "5", "--format", "csv"]);
    let mut rdr = csv::Reader::from_reader(c.as_bytes());
    let head = rdr.headers().unwrap().clone();
    assert_eq!(&head, vec!["n", "E_re", "E_im", "kind", "residual"]);
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    let v = json(&j);
    for (rec, row) in rows.iter().zip(v["rows"].as_array().unwrap()) {
        assert_eq!(rec[1], row["E"]["re"].to_string());
        assert_eq!(rec[2], row["E"]["im"].to_string());
        assert_eq!(rec[4], row["residual"].to_string());
    }
}

#[test]
fn plot_format() {
    let (code, out) = call(&["rectwell", "--v1", "2", "--format", "plot"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "# rectwell");
    assert_eq!(lines[1], "# n E");
    let cols: Vec<&str> = lines[2].split(' ').collect();
    assert_eq!(cols.len(), 2);
    assert!((cols[1].parse::<f64>().unwrap() + 1.20779566773).abs() < 1e-10);
}

#[test]
fn imaginary_coupling_literal() {
    let (code, out) = call(&["spectrum-hard", "--g", "5.0i", "--count", "3"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["summary"]["pt_broken"], Value::Bool(false));
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn soft_sweep_rows() {
    let (code, out) = call(&["sweep", "--system", "soft", "--g", "0.1,0.6,1.2", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let rows: Vec<Vec<f64>> =
        rdr.records().map(|r| r.unwrap().iter().take(3).map(|x| x.parse().unwrap()).collect()).collect();
    let want = [[0.1, -9.29466, -1.7849e-6], [0.6, -2.58012, -0.00275], [1.2, -0.40891, -0.14426]];
    for (r, w) in rows.iter().zip(want) {
        assert!((r[1] - w[1]).abs() < 1e-4 && (r[2] - w[2]).abs() < 1e-4, "{r:?}");
    }
}

#[test]
fn sweep_marks_missing_values() {
    let (code, out) = call(&["sweep", "--system", "soft", "--g", "1.2,2.0", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "g,E1,E2,status");
    assert_eq!(lines[2], "2,,,ok");
}

#[test]
fn single_point_sweep_matches_run() {
    let (_, s) = call(&["sweep", "--system", "hard", "--g", "12.31", "--count", "5", "--format", "csv"]);
    let (_, r) = call(&["spectrum-hard", "--g", "12.31", "--count", "5", "--format", "csv"]);
    let sweep: Vec<String> = csv::Reader::from_reader(s.as_bytes()).records().next().unwrap().unwrap().iter().map(String::from).collect();
    let run: Vec<String> = csv::Reader::from_reader(r.as_bytes()).records().map(|x| x.unwrap()[1].to_string()).collect();
    for (i, e) in run.iter().enumerate() {
        assert_eq!(&sweep[1 + 2 * i], e);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["nonsense"]).0, 1);
    assert_eq!(bin(&["spectrum-hard"]).0, 1);
    assert_eq!(bin(&["spectrum-hard", "--g", "12.31", "--tol", "-1"]).0, 1);
    assert_eq!(bin(&["spectrum-hard", "--g", "12.31", "--branch", "3"]).0, 1);
    assert_eq!(bin(&["bands", "--g", "3.4", "--e-min", "5", "--e-max", "1"]).0, 1);
    assert_eq!(bin(&["--help"]).0, 0);
    let (code, _, err) = bin(&["critical", "--system", "soft", "--g-min", "1.3", "--g-max", "1.5"]);
    assert_eq!(code, 2);
    assert!(err.contains("solver error"));
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_pt-spectra"))
        .args(["spectrum-hard", "--g", "3", "--count", "2"])
        .env("PT_SPECTRA_TOL", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_pt-spectra"))
        .args(["spectrum-hard", "--g", "3", "--count", "2"])
        .env("PT_SPECTRA_TOL", "1e-8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn number_printing() {
    assert_eq!(format_number(7.031649451842), "7.03164945184");
    assert_eq!(format_number(-1.78575081415e-6), "-1.78575081415e-6");
    assert_eq!(format_number(1234567.0), "1.234567e6");
    assert_eq!(format_number(0.0), "0");
}
