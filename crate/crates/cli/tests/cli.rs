use std::process::Command as Process;

use clap::{CommandFactory, ValueEnum};
use serde_json::Value;
use whirly_lab::{run_args, Cli, Command, Outcome};

const BIN: &str = env!("CARGO_BIN_EXE_whirly-lab");

fn lab(args: &[&str]) -> Outcome {
    run_args(std::iter::once("whirly-lab").chain(args.iter().copied()))
}

fn json(out: &Outcome) -> Value {
    serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}{}", out.stdout, out.stderr))
}

fn schema() -> jsonschema::Validator {
    let text = include_str!("../schema/report.schema.json");
    jsonschema::validator_for(&serde_json::from_str(text).unwrap()).unwrap()
}

fn assert_valid(v: &Value) {
    let validator = schema();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?} in {v}");
}

#[test]
fn help_lists_every_command_and_flag() {
    let out = lab(&["--help"]);
    assert_eq!(out.exit_code, 0);
    for c in Command::value_variants() {
        assert!(out.stdout.contains(c.name()), "help is missing {}", c.name());
    }
    for arg in Cli::command().get_arguments() {
        if let Some(long) = arg.get_long() {
            assert!(out.stdout.contains(&format!("--{long}")), "help is missing --{long}");
        }
    }
}

#[test]
fn convolve_example_agrees_with_disk_mass() {
    let out = lab(&[
        "verify-convolve",
        "--set",
        "disk:level0:r1",
        "--a",
        "1",
        "--samples",
        "1000000",
        "--seed",
        "7",
    ]);
    assert_eq!(out.exit_code, 0, "{}", out.stdout);
    let v = json(&out);
    assert_valid(&v);
    let exact = 1.0 - (-0.5f64).exp();
    for key in ["direct_estimate", "fubini_estimate"] {
        let est = v["observed"][key].as_f64().unwrap();
        assert!((est - exact).abs() < 0.003, "{key} = {est}");
    }
}

#[test]
fn sharpness_example_concentrates_at_the_limit() {
    let out = lab(&[
        "sharpness",
        "--a",
        "2",
        "--b",
        "1",
        "--dims",
        "10000",
        "--samples",
        "200",
        "--seed",
        "1",
    ]);
    assert_eq!(out.exit_code, 0);
    let v = json(&out);
    assert_valid(&v);
    let mean = v["observed"]["mean_preimage_rms"].as_f64().unwrap();
    assert!((mean - 0.5f64.sqrt()).abs() < 0.01, "{mean}");
}

#[test]
fn whirly_example_finds_a_cover() {
    let out = lab(&[
        "whirly-search",
        "--set",
        "disk:level0:r1",
        "--epsilon",
        "0.5",
        "--samples",
        "200000",
        "--max-depth",
        "12",
        "--seed",
        "3",
    ]);
    assert_eq!(out.exit_code, 0);
    let v = json(&out);
    assert_valid(&v);
    assert!(v["observed"]["found_n"].is_number());
    assert!(v["observed"]["found_m"].is_number());
    assert!(v["observed"]["union_estimate"].as_f64().unwrap() > 0.5);
}

#[test]
fn failed_verification_exits_with_one() {
    let out = lab(&[
        "whirly-search",
        "--set",
        "disk:level0:r1",
        "--epsilon",
        "0.01",
        "--samples",
        "1000",
        "--max-depth",
        "3",
    ]);
    assert_eq!(out.exit_code, 1);
    assert_eq!(json(&out)["pass"], Value::Bool(false));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["whirly-search", "--set", "disk:level0:r1"][..],
        &["whirly-search", "--set", "disk:level0:r1", "--epsilon", "1.5"],
        &["verify-convolve", "--set", "disk:level0:r1"],
        &["verify-convolve", "--set", "box", "--a", "1"],
        &[
            "verify-convolve",
            "--set",
            "disk:level0:r1",
            "--a",
            "1",
            "--samples",
            "10",
        ],
        &["sharpness", "--a", "0", "--b", "1"],
        &["sharpness", "--a", "1", "--b", "1", "--dims", "10"],
        &["estimate", "--set", "disk:level0:r1", "--dims", "5"],
        &["verify-independence", "--set", "disk:level0:r1", "--s", "1", "--m", "9"],
        &["frobnicate"],
        &[],
    ] {
        let out = lab(args);
        assert_eq!(out.exit_code, 2, "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn binary_reports_exit_codes_and_one_line_diagnostics() {
    let out = Process::new(BIN)
        .args(["whirly-search", "--set", "disk:level0:r1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("--epsilon"));

    let out = Process::new(BIN)
        .args([
            "estimate",
            "--set",
            "disk:level0:r1",
            "--samples",
            "1000",
            "--no-timing",
        ])
        .env("WHIRLY_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 99);
}

#[test]
fn worker_count_never_changes_the_bytes() {
    let cases: [&[&str]; 5] = [
        &["estimate", "--set", "disk:level1:r1.5:c0.2,0", "--samples", "30000"],
        &[
            "verify-convolve",
            "--set",
            "disk:level0:r1",
            "--a",
            "-2",
            "--samples",
            "20000",
        ],
        &["verify-marginals", "--n", "2", "--samples", "20000"],
        &[
            "verify-independence",
            "--set",
            "disk:level0:r1",
            "--s",
            "1",
            "--m",
            "3",
            "--samples",
            "20000",
        ],
        &[
            "positivity-scan",
            "--set",
            "disk:level0:r1",
            "--a",
            "-2",
            "--z-samples",
            "20",
            "--samples",
            "5000",
        ],
    ];
    for args in cases {
        let outs: Vec<String> = ["1", "4"]
            .iter()
            .map(|w| {
                let mut full = args.to_vec();
                full.extend(["--seed", "11", "--no-timing", "--workers", w]);
                let out = lab(&full);
                assert!(out.exit_code <= 1, "{args:?}: {}", out.stderr);
                out.stdout
            })
            .collect();
        assert_eq!(outs[0], outs[1], "{args:?}");
    }
}

#[test]
fn every_command_emits_a_schema_valid_report() {
    let cases: [&[&str]; 10] = [
        &["sample", "--depth", "2", "--samples", "3"],
        &["estimate", "--set", "disk:level0:r1", "--samples", "1000"],
        &["verify-marginals", "--n", "1", "--samples", "2000"],
        &[
            "verify-action-identity",
            "--n",
            "1",
            "--k",
            "3",
            "--s",
            "-0.5",
            "--samples",
            "50",
        ],
        &[
            "verify-continuity",
            "--set",
            "disk:level0:r1",
            "--epsilon",
            "0.1",
            "--n",
            "3",
            "--samples",
            "2000",
        ],
        &[
            "verify-convolve",
            "--set",
            "disk:level0:r1",
            "--a",
            "2",
            "--samples",
            "10000",
        ],
        &[
            "verify-independence",
            "--set",
            "disk:level0:r1",
            "--s",
            "1",
            "--m",
            "2",
            "--samples",
            "2000",
        ],
        &[
            "positivity-scan",
            "--set",
            "disk:level0:r1",
            "--a",
            "-2",
            "--z-samples",
            "10",
            "--samples",
            "1000",
            "--epsilon",
            "0.5",
        ],
        &[
            "whirly-search",
            "--set",
            "disk:level0:r1",
            "--epsilon",
            "0.5",
            "--samples",
            "5000",
            "--max-depth",
            "4",
        ],
        &[
            "sharpness",
            "--a",
            "1.4142135623730951",
            "--b",
            "1",
            "--dims",
            "1000",
            "--samples",
            "10",
        ],
    ];
    for args in cases {
        let out = lab(args);
        assert!(out.exit_code <= 1, "{args:?}: {}", out.stderr);
        let v = json(&out);
        assert_valid(&v);
        assert!(!v["name"].as_str().unwrap().is_empty());
    }
}

#[test]
fn sample_and_action_identity_always_pass() {
    let out = lab(&["sample", "--depth", "4", "--samples", "2"]);
    assert_eq!(out.exit_code, 0);
    let v = json(&out);
    let leaves = v["parameters"]["leaves"].as_array().unwrap();
    assert_eq!(leaves.len(), 2);
    assert_eq!(leaves[0].as_array().unwrap().len(), 16);

    let out = lab(&[
        "verify-action-identity",
        "--n",
        "2",
        "--k",
        "5",
        "--s",
        "3",
        "--samples",
        "200",
    ]);
    assert_eq!(out.exit_code, 0);
}

#[test]
fn csv_output_has_a_header_row() {
    let out = lab(&[
        "estimate",
        "--set",
        "disk:level0:r1",
        "--samples",
        "1000",
        "--format",
        "csv",
    ]);
    assert_eq!(out.exit_code, 0);
    let mut rdr = csv::Reader::from_reader(out.stdout.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["report", "section", "key", "value"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert!(rows.iter().any(|r| &r[1] == "observed" && &r[2] == "estimate"));

    let out = lab(&["sample", "--depth", "3", "--samples", "2", "--format", "csv"]);
    let mut rdr = csv::Reader::from_reader(out.stdout.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["tree", "leaf", "re", "im"]);
    assert_eq!(rdr.records().count(), 16);
}

#[test]
fn config_files_are_strict_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        r#"{"command":"estimate","set":"disk:level0:r1","samples":2000,"seed":5,"no-timing":true}"#,
    )
    .unwrap();
    let out = lab(&["--config", good.to_str().unwrap()]);
    assert_eq!(out.exit_code, 0, "{}", out.stderr);
    assert_eq!(json(&out)["seed"], 5);
    assert_eq!(json(&out)["parameters"]["samples"], 2000);

    let out = lab(&["--config", good.to_str().unwrap(), "--seed", "6"]);
    assert_eq!(json(&out)["seed"], 6);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"command":"estimate","set":"disk:level0:r1","colour":"red"}"#).unwrap();
    let out = lab(&["--config", bad.to_str().unwrap()]);
    assert_eq!(out.exit_code, 2);
    assert!(out.stderr.contains("colour"));

    let set = dir.path().join("set.json");
    std::fs::write(
        &set,
        r#"{"kind":"disk-product","level":0,"centers":[[0.0,0.0]],"radii":[1.0]}"#,
    )
    .unwrap();
    let out = lab(&["estimate", "--set", &format!("@{}", set.display()), "--samples", "1000"]);
    assert_eq!(out.exit_code, 0, "{}", out.stderr);
}

#[test]
fn output_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = lab(&[
        "estimate",
        "--set",
        "disk:level0:r1",
        "--samples",
        "1000",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.exit_code, 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_valid(&v);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let args = [
        "verify-continuity",
        "--epsilon",
        "0.1",
        "--n",
        "4",
        "--samples",
        "3000",
        "--no-timing",
    ];
    assert_eq!(lab(&args).stdout, lab(&args).stdout);
}

#[test]
fn smoke_suite_reports_all_criteria() {
    let out = lab(&["suite", "--smoke", "--no-timing", "--format", "json"]);
    assert!(out.exit_code <= 1, "{}", out.stderr);
    let v = json(&out);
    let criteria = v["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 10);
    for c in criteria {
        for r in c["reports"]
            .as_array()
            .unwrap()
            .iter()
            .chain(c["controls"].as_array().unwrap())
        {
            assert_valid(r);
        }
    }
}
