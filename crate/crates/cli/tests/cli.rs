use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypersum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn compute_prints_the_value() {
    let out = run(&[
        "compute", "--r", "1", "--m", "2", "--method", "direct", "--digits", "9",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("2.404113806"), "{text}");
    assert!(text.contains("method: direct"));
}

#[test]
fn compute_json_document() {
    let doc = json(&[
        "compute", "--r", "2", "--m", "3", "--digits", "20", "--format", "json",
    ]);
    assert_eq!(doc["value"], "2.11208378160988487372");
    assert_eq!(doc["query"]["r"], 2);
    assert_eq!(doc["query"]["m"], 3);
    assert_eq!(doc["query"]["method"], "closed");
    assert!(doc["query"]["k"].is_null());
    assert!(doc.get("elapsed_ms").is_none());
    let bound: f64 = doc["error_bound"].as_str().unwrap().parse().unwrap();
    assert!(bound <= 1e-20);

    let timed = json(&[
        "compute", "--r", "2", "--m", "3", "--format", "json", "--timing",
    ]);
    assert!(timed["elapsed_ms"].is_u64());
}

#[test]
fn hurwitz_method_takes_a_depth() {
    let doc = json(&[
        "compute", "--r", "3", "--m", "4", "--method", "hurwitz", "--k", "2", "--digits", "15",
        "--format", "json",
    ]);
    assert_eq!(doc["query"]["method"], "hurwitz");
    assert_eq!(doc["query"]["k"], 2);
    assert_eq!(doc["value"], "1.628620202415129");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&["compute", "--r", "3", "--m", "3"]), 2);
    assert_eq!(code(&["compute", "--r", "0", "--m", "3"]), 2);
    assert_eq!(
        code(&["compute", "--r", "2", "--m", "4", "--method", "hurwitz", "--k", "2"]),
        2
    );
    assert_eq!(code(&["compute", "--r", "2", "--m", "4", "--k", "1"]), 2);
    assert_eq!(
        code(&["compute", "--r", "2", "--m", "4", "--method", "magic"]),
        2
    );
    assert_eq!(
        code(&["compute", "--r", "2", "--m", "4", "--digits", "0"]),
        2
    );
    assert_eq!(code(&["compute", "--r", "2"]), 2);
    assert_eq!(code(&["table", "--r", "3..1", "--m", "2..4"]), 2);
    assert_eq!(code(&["table", "--r", "x", "--m", "2..4"]), 2);
    assert_eq!(code(&["verify", "--filter", "nosuch*"]), 2);
    assert_eq!(code(&["verify", "--filter", "nosuch"]), 2);
    assert_eq!(code(&["verify", "--filter", "[eq"]), 2);
    assert_eq!(code(&[]), 2);
}

#[test]
fn divergence_is_explained() {
    let out = run(&["compute", "--r", "3", "--m", "3"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("m > r"), "{err}");
}

#[test]
fn failing_identity_exits_with_one() {
    let out = run(&["verify", "--filter", "eq8_15over6", "--digits", "25"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.starts_with("FAIL eq8_15over6"), "{text}");
    assert!(text.contains("0 passed, 1 failed"));
}

#[test]
fn filtered_verify_passes() {
    let out = run(&["verify", "--filter", "eq*", "--digits", "20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    // eq1, eq3, eq4, the three golden values and eq23
    assert_eq!(lines.len(), 6 + 6 + 6 + 3 + 5 + 1);
    assert!(lines[..lines.len() - 1]
        .iter()
        .all(|l| l.starts_with("PASS ")));
    assert_eq!(*lines.last().unwrap(), "26 passed, 0 failed");
}

#[test]
fn verify_json_is_an_array_of_reports() {
    let out = run(&["verify", "--filter", "alt_*", "--format", "json"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let arr = doc.as_array().unwrap();
    assert_eq!(arr.len(), 7);
    for rec in arr {
        assert_eq!(rec["passed"], true);
        assert!(rec["residual"].is_string());
        assert!(rec["bracketed"].is_boolean());
        assert!(rec.get("elapsed_ms").is_none());
    }
    assert_eq!(
        String::from_utf8(out.stderr).unwrap().trim(),
        "7 passed, 0 failed"
    );
}

#[test]
fn json_output_is_deterministic() {
    let args = [
        "verify", "--filter", "thm*", "--digits", "20", "--format", "json",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["table", "--r", "1..3", "--m", "2..5", "--format", "json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn table_marks_divergent_cells() {
    let out = run(&["table", "--r", "1..3", "--m", "2..4", "--digits", "10"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].contains("2.4041138063"));
    assert!(lines[2].contains("2.1120837816"));
    assert!(lines[3].contains("1.6286202024"));
    assert_eq!(lines[3].matches('—').count(), 2);

    let doc = json(&["table", "--r", "2..2", "--m", "2..3", "--format", "json"]);
    assert_eq!(doc["m"], serde_json::json!([2, 3]));
    let cells = &doc["rows"][0]["cells"];
    assert!(cells[0].is_null());
    assert_eq!(cells[1]["value"], "2.112083781609885");
}
