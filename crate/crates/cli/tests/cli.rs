use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    root.to_string_lossy().into_owned()
}

fn cms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cms")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = cms(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cms(&["optimize", "--dim", "0", "--objective", "x0", "--constraint", "x0"]).status.code(), Some(2));
    assert_eq!(cms(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(cms(&["eval", "--expr", "x0", "--point", "1/2", "--dim", "1", "-n", "0"]).status.code(), Some(2));
}

#[test]
fn contract_violations_exit_one() {
    // objective range [0, 4] does not fit the output window
    let out = cms(&["optimize", "--dim", "1", "--objective", "x0 * 4", "--constraint", "x0 - 1/2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    let out = cms(&["volume", "--body", "/nonexistent/body.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn json_output_is_deterministic() {
    let args = ["isoperimetric", "--max-gon", "16", "-n", "8"];
    let a = cms(&[&["--format", "json"][..], &args[..]].concat());
    let b = cms(&[&["--format", "json"][..], &args[..]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn volume_and_surface_of_unit_square() {
    let v = json(&["volume", "--body", &fixture("square.json")]);
    assert_eq!(v["volume"]["exact"], "1");
    let s = json(&["surface", "--body", &fixture("square.json")]);
    let lo: f64 = s["enclosure"]["lo_decimal"].as_str().unwrap().parse().unwrap();
    let hi: f64 = s["enclosure"]["hi_decimal"].as_str().unwrap().parse().unwrap();
    assert!(lo <= 4.0 && 4.0 <= hi, "{s}");
}

#[test]
fn optimize_reports_converged_interval() {
    let r = json(&["optimize", "--dim", "1", "--objective", "x0", "--constraint", "x0 - 1/2"]);
    assert_eq!(r["status"], "converged");
    assert_eq!(r["interval"]["lo"], "1/2^1");
    assert_eq!(r["interval"]["hi"], "513/2^10");
}

#[test]
fn eval_agrees_between_direct_and_graph() {
    let r = json(&["eval", "--expr", "x0 * x0", "--point", "3/4", "--dim", "1"]);
    assert_eq!(r["exact"]["exact"], "9/2^4");
    assert_eq!(r["direct"]["exact"], r["graph"]["exact"]);
}

#[test]
fn frechet_of_offset_staircases_contains_one() {
    let r = json(&["frechet", "--a", &fixture("offset_a.json"), "--b", &fixture("offset_b.json"), "-n", "8"]);
    let lo: f64 = r["enclosure"]["lo_decimal"].as_str().unwrap().parse().unwrap();
    let hi: f64 = r["enclosure"]["hi_decimal"].as_str().unwrap().parse().unwrap();
    assert!(lo <= 1.0 && 1.0 <= hi, "{r}");
}

#[test]
fn selftest_passes_with_small_case_count() {
    let r = json(&["selftest", "--seed", "7", "--cases", "5"]);
    assert_eq!(r["ok"], true, "{r}");
}

#[test]
fn frechet_witness_is_a_monotone_coupling() {
    let r =
        json(&["frechet", "--a", &fixture("offset_a.json"), "--b", &fixture("offset_b.json"), "-n", "4", "--witness"]);
    let pairs = r["witness"].as_array().expect("witness array");
    assert_eq!(pairs.len() as u64, r["coupling_length"].as_u64().unwrap());
    assert_eq!(pairs[0], serde_json::json!([0, 0]));
    for w in pairs.windows(2) {
        let (i0, j0) = (w[0][0].as_u64().unwrap(), w[0][1].as_u64().unwrap());
        let (i1, j1) = (w[1][0].as_u64().unwrap(), w[1][1].as_u64().unwrap());
        assert!(i1 >= i0 && j1 >= j0 && i1 - i0 <= 1 && j1 - j0 <= 1 && (i1, j1) != (i0, j0));
    }
}
