#![allow(dead_code)]

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

pub struct Run {
    pub code: i32,
    pub report: Value,
    pub stderr: String,
}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        jsonschema::validator_for(&schema).expect("schema compiles")
    })
}

/// Panics with every violation when `report` does not match the schema.
pub fn assert_schema_valid(report: &Value) {
    let errors: Vec<String> = validator().iter_errors(report).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "report violates schema:\n{}", errors.join("\n"));
}

pub fn write_config(dir: &Path, name: &str, config: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

/// Runs the binary with the report on stdout, checking it against the schema.
pub fn ifconv(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_ifconv")).args(args).output().expect("binary runs");
    let report: Value = serde_json::from_slice(&out.stdout).expect("stdout is a JSON report");
    assert_schema_valid(&report);
    Run { code: out.status.code().expect("exit code"), report, stderr: String::from_utf8_lossy(&out.stderr).into_owned() }
}

pub fn without_timings(mut report: Value) -> Value {
    report.as_object_mut().unwrap().remove("timings");
    report
}
