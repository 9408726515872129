use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bergman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../docs/schemas/{name}.schema.json"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&doc).expect("schema compiles")
}

fn json_ok(name: &str, args: &[&str]) -> Value {
    let mut full = vec![name];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--format", "json"]);
    let out = bergman(&full);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let value: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let compiled = schema(name);
    if let Err(errors) = compiled.validate(&value) {
        let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
        panic!("{name} output violates its schema: {msgs:?}\n{value}");
    }
    value
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = vec![reader.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(reader.records().map(|r| r.unwrap().iter().map(String::from).collect()));
    rows
}

#[test]
fn norm_values() {
    let v = json_ok("norm", &["--d", "1", "--sigma", "0", "--n", "1", "--p", "2"]);
    let value = v["value"]["exact"].as_f64().unwrap();
    assert!((value - 8.0 / std::f64::consts::PI).abs() < 1e-11);
    let v = json_ok("norm", &["--d", "2", "--n", "1", "--p", "2"]);
    assert_eq!(v["value"]["exact"].as_f64(), Some(6.0));
    let v = json_ok("norm", &["--d", "1", "--n", "2", "--p", "2"]);
    assert_eq!(v["value"]["exact"].as_f64(), Some(6.0));
    let v = json_ok("norm", &["--d", "2", "--n", "2", "--p", "1"]);
    assert_eq!(v["C"]["kind"], "interval");
    assert_eq!(v["C"]["lower"].as_f64(), Some(1.5));
    let v = json_ok("norm", &["--d", "2", "--norm", "max:1,inf"]);
    assert_eq!(v["C"]["kind"], "estimate");
}

#[test]
fn norm_csv_has_fixed_header() {
    let out = bergman(&["norm", "--d", "2", "--sigma", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(
        rows[0].join(","),
        "d,sigma,n,norm,c_kind,c_lower,c_upper,c_estimate,lambda,value_lower,value_upper,value_estimate"
    );
    assert_eq!(rows[1][8], "3.5");
}

#[test]
fn verify_default_passes() {
    let out = bergman(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0].join(","), "check,residual,tolerance,pass");
    assert!(rows[1..].iter().all(|r| r[3] == "true"));
    let v = json_ok("verify", &["--d", "2"]);
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_rejects_bad_sigma() {
    let out = bergman(&["verify", "--sigma", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("σ>−1"));
}

#[test]
fn verify_detects_impossible_tolerance() {
    let out = bergman(&["verify", "--max-residual", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("false"));
}

#[test]
fn parameter_ranges_are_configuration_errors() {
    for args in [
        vec!["norm", "--d", "0"],
        vec!["norm", "--n", "0"],
        vec!["norm", "--p", "0.5"],
        vec!["converge", "--eps", "0.5,1.0"],
        vec!["converge", "--eps", "0"],
        vec!["converge", "--norm", "max:1,inf"],
        vec!["jvalue", "--c", "1"],
        vec!["jvalue", "--r", "1.2"],
        vec!["verify", "--d", "3", "--radial-nodes", "16"],
        vec!["verify", "--rule", "{\"scheme\":\"simpson\"}"],
        vec!["cp", "--p", "nope"],
        vec!["reference", "--kind", "l1", "--sigma", "0"],
        vec!["frobnicate"],
    ] {
        let out = bergman(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
    let out = bergman(&["converge", "--eps", "0.5,1.0"]);
    assert!(stderr(&out).contains("ε < 1 required; the limit is analytic"));
}

#[test]
fn bad_thread_count_is_a_configuration_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(["norm"])
        .env("BERGMAN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn converge_table_and_footer() {
    let out = bergman(&["converge", "--d", "1", "--sigma", "0", "--n", "1", "--p", "inf"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0].join(","), "epsilon,value,error,ratio");
    assert_eq!(rows.len(), 7);
    let footer = rows.last().unwrap();
    assert_eq!(footer[0], "theoretical_norm");
    assert_eq!(footer[1], "2.54647908947");
    let ratios: Vec<f64> = rows[1..6].iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]));
    let v = json_ok("converge", &["--d", "2", "--eps", "0.5,0.9"]);
    assert_eq!(v["theoretical_norm"].as_f64(), Some(6.0));
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn converge_is_byte_identical_across_runs_and_thread_counts() {
    let args = ["converge", "--d", "3", "--eps", "0.5,0.8", "--samples", "20000", "--seed", "9"];
    let a = bergman(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .env("BERGMAN_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let c = bergman(&["converge", "--d", "3", "--eps", "0.5,0.8", "--samples", "20000", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("bergman-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cp.csv");
    let out = bergman(&["cp", "--d", "2", "--n", "1", "--p", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    let rows = csv_rows(&text);
    assert_eq!(rows[0].join(","), "d,n,p,lower,upper,estimate,converged");
    let sqrt2: f64 = rows[1][3].parse().unwrap();
    let est: f64 = rows[1][5].parse().unwrap();
    assert!((sqrt2 - 2f64.sqrt()).abs() < 1e-11);
    assert!((est - 2f64.sqrt()).abs() < 1e-8);
}

#[test]
fn cp_json_rows() {
    let v = json_ok("cp", &["--d", "2,3", "--n", "1,2", "--p", "1,inf"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for row in rows {
        if row["kind"] == "interval" {
            let (lo, hi, est) = (row["lower"].as_f64().unwrap(), row["upper"].as_f64().unwrap(), row["estimate"].as_f64().unwrap());
            assert!(lo - 1e-8 <= est && est <= hi + 1e-8);
        }
    }
}

#[test]
fn reference_values() {
    let v = json_ok("reference", &["--sigma", "0"]);
    let l2 = v["constants"].as_array().unwrap().iter().find(|c| c["kind"] == "l2").unwrap();
    assert_eq!(l2["lower"].as_f64(), Some(1.0));
    let l1 = v["constants"].as_array().unwrap().iter().find(|c| c["kind"] == "l1").unwrap();
    assert_eq!(l1["type"], "unavailable");
    json_ok("reference", &["--d", "3", "--sigma", "1.5", "--kind", "liu", "--p", "3"]);
}

#[test]
fn jvalue_side_by_side() {
    let v = json_ok("jvalue", &["--c", "-1", "--t", "0", "--d", "1", "--r", "0.9"]);
    let row = &v["rows"][0];
    let numeric = row["numeric"].as_f64().unwrap();
    let error = row["error"].as_f64().unwrap();
    assert!(numeric <= 4.0 / std::f64::consts::PI + 3.0 * error);
    assert!((numeric - 1.1606800076153).abs() < 1e-9);
    json_ok("jvalue", &["--c", "-2", "--t", "0.5", "--d", "2", "--r", "0,0.5"]);
}

#[test]
fn schemas_reject_malformed_documents() {
    let mut v = json_ok("norm", &[]);
    v.as_object_mut().unwrap().remove("value");
    assert!(!schema("norm").is_valid(&v));
    let mut v = json_ok("converge", &["--eps", "0.5"]);
    v["route"] = Value::from("sideways");
    assert!(!schema("converge").is_valid(&v));
}
