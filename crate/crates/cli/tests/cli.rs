use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;
use tempfile::TempDir;

fn elated(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elated"))
        .args(args)
        .env_remove("ELATED_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = elated(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn schema() -> JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/output.schema.json");
    let raw: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    JSONSchema::compile(&raw).expect("schema compiles")
}

const COMMANDS: &[&[&str]] = &[
    &["cycles", "--base", "10"],
    &["cycles", "--base", "2"],
    &["cycles", "--base", "10", "--exp", "3", "--bound", "10000"],
    &["height", "8888999999", "--base", "10"],
    &["height", "4", "--base", "10"],
    &["height", "7", "--base", "10", "--happy"],
    &["epsilon", "6", "--base", "10"],
    &["epsilon", "5", "--base", "2"],
    &["epsilon", "14", "--base", "10"],
    &["sigma", "5", "--base", "10"],
    &["preimage", "561", "--base", "10"],
    &["preimage", "1124999922", "--base", "10", "--reduced"],
    &["constants", "--base", "7"],
    &["sequence", "attracted", "--base", "5", "--length", "2"],
    &["sequence", "consecutive", "--base", "3", "--length", "1"],
    &["sequence", "nonelated", "--base", "3", "--length", "2", "--target", "5"],
    &["verify-towers", "--k", "13"],
    &["verify-towers"],
];

#[test]
fn json_output_matches_schema() {
    let schema = schema();
    for args in COMMANDS {
        let doc = json(args);
        if let Err(errors) = schema.validate(&doc) {
            let msgs: Vec<String> = errors.map(|e| format!("{e} at {}", e.instance_path)).collect();
            panic!("{args:?} violates the schema: {msgs:#?}");
        };
    }
}

#[test]
fn schema_rejects_malformed_documents() {
    let schema = schema();
    let mut doc = json(&["constants", "--base", "10"]);
    assert!(schema.is_valid(&doc));
    doc["results"]["a_star"] = Value::String("561".into());
    assert!(!schema.is_valid(&doc));
    let mut doc = json(&["cycles", "--base", "10"]);
    doc["status"] = Value::String("done".into());
    assert!(!schema.is_valid(&doc));
}

#[test]
fn cycle_table_row() {
    let out = elated(&["cycles", "--base", "10", "--format", "text"]);
    assert_eq!(
        stdout(&out).trim(),
        "10 & (1), (26, 80, 512, 150), (33, 54, 205, 58, 445, 228, 144), (46, 208, 136), (298)"
    );
    let doc = json(&["cycles", "--base", "10"]);
    assert_eq!(doc["results"]["matches_reference"], Value::Bool(true));
}

#[test]
fn epsilon_twelve() {
    let doc = json(&["epsilon", "12", "--base", "10"]);
    assert_eq!(doc["results"]["value"], "8888999999");
    assert_eq!(doc["results"]["method"], "search");
    assert_eq!(doc["results"]["trajectory"].as_array().unwrap().len(), 13);
}

#[test]
fn large_values_are_run_length_encoded() {
    let doc = json(&["epsilon", "13", "--base", "10"]);
    assert_eq!(doc["results"]["value"], Value::Null);
    assert_eq!(doc["results"]["rendered"], "8157[9^13888887]");
    let doc = json(&["epsilon", "4", "--base", "3", "--digit-cap", "5"]);
    assert_eq!(doc["results"]["value"], Value::Null);
    assert_eq!(doc["results"]["rendered"], "1[2^13]");
    let doc = json(&["epsilon", "4", "--base", "3"]);
    assert_eq!(doc["results"]["value"], "3188645");
}

#[test]
fn verify_towers_reports_the_ladder() {
    let doc = json(&["verify-towers", "--k", "16"]);
    assert_eq!(doc["status"], "verified");
    let r = &doc["results"];
    assert_eq!(r["height"], 16);
    let found = |label: &str, m: &str, v: &str| {
        r["congruences"]
            .as_array()
            .unwrap()
            .iter()
            .any(|c| c["label"] == label && c["modulus"] == m && c["computed"] == v)
    };
    assert!(found("n14", "1458", "566"));
    assert!(found("ε14", "45927", "31402"));
    assert!(found("ε15/9", "81", "48"));
    let chain = r["chain"].as_array().unwrap();
    assert_eq!(chain.len(), 17);
    assert_eq!(chain.last().unwrap()["value"], "1");
}

#[test]
fn csv_has_header_and_rows() {
    let out = elated(&["preimage", "534", "--base", "10", "--format", "csv"]);
    assert_eq!(stdout(&out), "a,member\n534,18899999\n534,47899999\n");
}

#[test]
fn output_is_deterministic_across_threads() {
    for args in [
        &["epsilon", "3", "--base", "7"][..],
        &["sigma", "6", "--base", "10"],
        &["sequence", "attracted", "--base", "10", "--length", "2"],
        &["verify-towers", "--k", "15"],
    ] {
        let runs: Vec<Vec<u8>> = ["1", "4", "1"]
            .iter()
            .map(|t| {
                let mut a = args.to_vec();
                a.extend(["--threads", t]);
                let out = elated(&a);
                assert!(out.status.success());
                out.stdout
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{args:?}");
        assert_eq!(runs[0], runs[2], "{args:?}");
    }
}

#[test]
fn cold_and_warm_cache_agree() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["epsilon", "5", "--base", "6", "--cache-dir", d];
    let cold = elated(&args);
    let file = dir.path().join("heights-b6-e2-elated.txt");
    assert!(file.exists());
    let written = fs::read_to_string(&file).unwrap();
    assert!(written.starts_with("elated-height-cache 1\nbase 6\nexponent 2\nkind elated\n"));
    let warm = elated(&args);
    let uncached = elated(&["epsilon", "5", "--base", "6"]);
    assert!(cold.status.success() && warm.status.success());
    assert_eq!(cold.stdout, warm.stdout);
    assert_eq!(cold.stdout, uncached.stdout);
    assert_eq!(fs::read_to_string(&file).unwrap(), written);
}

#[test]
fn cache_dir_from_environment() {
    let env_dir = TempDir::new().unwrap();
    let flag_dir = TempDir::new().unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["height", "97", "--base", "10", "--happy"];
        args.extend(extra);
        Command::new(env!("CARGO_BIN_EXE_elated"))
            .args(&args)
            .env("ELATED_CACHE_DIR", env_dir.path())
            .output()
            .unwrap()
    };
    assert!(run(&[]).status.success());
    assert!(env_dir.path().join("heights-b10-e2-happy.txt").exists());
    assert!(run(&["--cache-dir", flag_dir.path().to_str().unwrap()]).status.success());
    assert!(flag_dir.path().join("heights-b10-e2-happy.txt").exists());
}

#[test]
fn corrupt_cache_exits_74_naming_the_file() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["height", "21", "--base", "10", "--cache-dir", d];
    assert!(elated(&args).status.success());
    let file = dir.path().join("heights-b10-e2-elated.txt");

    let good = fs::read_to_string(&file).unwrap();
    let cases = [
        good.replacen("elated-height-cache 1", "elated-height-cache 0", 1),
        good.replacen("\n1 0\n", "\n1 5\n", 1),
        good.replacen("\n3 ", "\n3x ", 1),
        good[..good.len() / 2].to_string(),
    ];
    for bad in cases {
        fs::write(&file, bad).unwrap();
        let out = elated(&args);
        assert_eq!(out.status.code(), Some(74));
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("heights-b10-e2-elated.txt"), "{err}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(elated(&["cycles", "--base", "10", "--bogus"]).status.code(), Some(64));
    assert_eq!(elated(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(elated(&["cycles", "--base", "1"]).status.code(), Some(2));
    assert_eq!(elated(&["cycles", "--base", "10", "--exp", "3"]).status.code(), Some(2));
    assert_eq!(elated(&["height", "0", "--base", "10"]).status.code(), Some(2));
    assert_eq!(elated(&["sequence", "nonelated", "--base", "2", "--length", "1"]).status.code(), Some(2));
    assert_eq!(elated(&["epsilon", "12", "--base", "10", "--limit", "1000"]).status.code(), Some(2));
    assert_eq!(elated(&["verify-towers", "--k", "17"]).status.code(), Some(64));
    assert_eq!(elated(&["--help"]).status.code(), Some(0));
    let out = elated(&["sequence", "nonelated", "--base", "2", "--length", "1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("all integers are 2-elated"));
}

#[test]
fn timing_is_opt_in() {
    let doc = json(&["constants", "--base", "5"]);
    assert!(doc.get("timing_ms").is_none());
    let doc = json(&["constants", "--base", "5", "--timing"]);
    assert!(doc["timing_ms"].is_u64());
}
