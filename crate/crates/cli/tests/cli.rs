use std::fs;
use std::process::Command;

use serde_json::Value;
use shellavg_cli::run;

fn shellavg(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("shellavg").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = shellavg(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn count_by_spin_csv() {
    let (code, out, _) = shellavg(&[
        "count", "--ell", "f", "--n", "6", "--by", "spin", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "N,2S,count\n6,6,7\n6,4,140\n6,2,588\n6,0,490\n");
}

#[test]
fn count_msml_matches_total() {
    let v = json(&["count", "--ell", "2", "--n", "3", "--by", "msml"]);
    let sum: u64 = v["by_ms_ml"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["count"].as_u64().unwrap())
        .sum();
    assert_eq!(sum, 120);
    assert_eq!(v["total"], 120);
}

#[test]
fn transform_both_directions() {
    let e = json(&["transform", "--ell", "1", "--from", "F", "--values", "1,0"]);
    assert_eq!(e["basis"], "E");
    assert_eq!(e["values"]["sigma"], "1");
    assert_eq!(e["values"]["pi"], "1");
    let f = json(&["transform", "--ell", "p", "--from", "e", "--values", "3,1"]);
    assert_eq!(f["values"]["F0"], "5/3");
    assert_eq!(f["values"]["F2"], "10/3");
}

#[test]
fn transform_reads_input_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("in.json");
    fs::write(
        &path,
        r#"{"ell": 2, "ell_prime": 2, "basis": "E", "values": {"sigma": "1", "pi": "1", "delta": 1}}"#,
    )
    .unwrap();
    let v = json(&["transform", "--ell", "2", "--input", path.to_str().unwrap()]);
    assert_eq!(v["values"]["F0"], "1");
    assert_eq!(v["values"]["F2"], "0");
    assert_eq!(v["values"]["F4"], "0");
}

#[test]
fn avg_examples() {
    assert_eq!(
        shellavg(&["avg", "--ell", "p", "--n", "2", "--spin", "2"]).1,
        "E^pi\n"
    );
    let (_, out, _) = shellavg(&["avg", "--ell", "p", "--n", "2", "--basis", "f"]);
    assert_eq!(out, "F^0 - 2/25 F^2\n");
    let (_, out, _) = shellavg(&["avg", "--ell", "1", "--n", "2", "--eval", "sigma=1,pi=1/2"]);
    assert_eq!(out, "1/5 E^sigma + 4/5 E^pi\n= 3/5\n~ 0.6\n");
    let v = json(&["avg", "--ell", "1", "--n", "2", "--format", "json"]);
    assert_eq!(v["coeffs"]["sigma"], "1/5");
    assert!(v.get("decimal").is_none());
}

#[test]
fn avg_rejects_empty_spin_levels() {
    let (code, _, err) = shellavg(&["avg", "--ell", "1", "--n", "6", "--spin", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("no states"), "{err}");
}

#[test]
fn terms_listing() {
    let (code, out, _) = shellavg(&["terms", "--ell", "p", "--basis", "f"]);
    assert_eq!(code, 0);
    assert!(out.contains("1D  F^0 + 1/25 F^2"), "{out}");
    let (_, csv, _) = shellavg(&["terms", "--ell", "1", "--format", "csv"]);
    assert_eq!(csv.lines().next(), Some("term,sigma,pi"));
}

#[test]
fn sumrule_single_and_scan() {
    let (code, out, _) = shellavg(&[
        "sumrule", "--ell", "1", "--parity", "even", "--args", "0,0,0,0",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "LHS 1\nRHS 1\nPASS\n");
    let v = json(&[
        "sumrule",
        "--ell",
        "2",
        "--parity",
        "odd",
        "--method",
        "clebsch-gordan",
        "--format",
        "json",
    ]);
    assert_eq!(v["checked"], 625);
    assert_eq!(v["pass"], true);
}

#[test]
fn emit_matrix_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let (code, out, _) = shellavg(&[
        "emit-matrix",
        "--ell",
        "1",
        "--n",
        "2",
        "--basis",
        "E",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("wrote 15x15 matrix"), "{out}");
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["dimension"], 15);
    assert_eq!(v["parameters"], serde_json::json!(["sigma", "pi"]));
    let diagonal: usize = v["elements"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["row"] == e["col"])
        .count();
    assert_eq!(diagonal, 15);
}

#[test]
fn emit_matrix_respects_dimension_cap() {
    let (code, _, err) = shellavg(&["emit-matrix", "--ell", "2", "--n", "3", "--max-dim", "10"]);
    assert_eq!(code, 2);
    assert!(err.contains("dimension"), "{err}");
}

#[test]
fn verify_small_range() {
    let v = json(&["verify", "--max-ell", "1", "--max-n", "3"]);
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().len() > 10);
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shellavg.conf");
    fs::write(&path, "ell = f\nn = 6\nby = spin\nformat = csv\n").unwrap();
    let p = path.to_str().unwrap();
    let (code, out, _) = shellavg(&["--config", p, "count"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("N,2S,count\n6,6,7\n"));
    // Explicit flags override the file.
    let (_, out, _) = shellavg(&["--config", p, "count", "--n", "1"]);
    assert_eq!(out, "N,2S,count\n1,1,7\n");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["count", "--ell", "x", "--n", "2"][..],
        &["count", "--ell", "1", "--n", "7"],
        &["frobnicate"],
        &["count", "--ell", "1", "--n", "2", "--bogus"],
        &["transform", "--ell", "1", "--from", "F", "--values", "1"],
    ] {
        assert_eq!(shellavg(args).0, 2, "{args:?}");
    }
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["count", "--ell", "3", "--n", "5"][..],
        &["terms", "--ell", "3", "--format", "json"],
        &["emit-matrix", "--ell", "2", "--n", "2", "--ms", "0"],
    ] {
        assert_eq!(shellavg(args), shellavg(args));
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_shellavg");
    let ok = Command::new(bin)
        .args(["avg", "--ell", "p", "--n", "2", "--spin", "2"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "E^pi\n");
    let bad = Command::new(bin)
        .args(["count", "--ell", "q"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
