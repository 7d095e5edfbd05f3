use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn lagfib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lagfib"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn unit_rows(n: usize, idx: &[usize]) -> Vec<Vec<String>> {
    idx.iter()
        .map(|&i| (0..n).map(|j| if i == j { "1" } else { "0" }.to_string()).collect())
        .collect()
}

#[test]
fn lossen_witness_is_classified() {
    let out = lagfib(&["classify-cubic", "--input", fixture("lossen.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = stdout_json(&out);
    assert_eq!(r["is_cone"], false);
    assert_eq!(r["all_partials_degenerate"], true);
    let plane: Vec<Vec<String>> = r["singular_plane"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|x| {
                    assert_eq!(x["im"], "0");
                    x["re"].as_str().unwrap().to_string()
                })
                .collect()
        })
        .collect();
    assert_eq!(plane, unit_rows(5, &[2, 3, 4]));
}

#[test]
fn inadmissible_box_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = lagfib(&[
        "torsion-search",
        "--input",
        fixture("inadmissible_box.json").to_str().unwrap(),
        "--order",
        "2",
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let diag: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(diag["status"], "refused");
    assert_eq!(diag["module"], "period_geometry");
    assert!(diag["message"].as_str().unwrap().contains("inadmissible frame"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inadmissible frame"));
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 5, \"entries\": [").unwrap();
    let out = lagfib(&["classify-cubic", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_input_file_is_a_config_error() {
    let out = lagfib(&["classify-cubic", "--input", "/nonexistent/cubic.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_command_is_a_config_error() {
    assert_eq!(lagfib(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lagfib(&["--help"]).status.code(), Some(0));
}

#[test]
fn requested_mode_must_match_document() {
    let out = lagfib(&[
        "classify-cubic",
        "--input",
        fixture("lossen.json").to_str().unwrap(),
        "--mode",
        "float",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mode mismatch"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = lagfib(&[
            "density-scan",
            "--input",
            fixture("density_slice.json").to_str().unwrap(),
            "--order",
            "1,2,4",
            "--samples",
            "100",
            "--seed",
            "7",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn elliptic_enumeration_matches_closed_form() {
    let out = lagfib(&[
        "elliptic-demo",
        "--input",
        fixture("elliptic_identity.json").to_str().unwrap(),
        "--order",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    let hits = r["torsion"][0]["hits"].as_array().unwrap();
    // τ = b, s = i: hits are b = (−k + N i)/m with m ≥ 1 and b in the box
    let mut expected = 0;
    for m in 1..=8i64 {
        let y = 4.0 / m as f64;
        if (0.5..=1.5).contains(&y) {
            expected += (-m..=m).count();
        }
    }
    assert_eq!(hits.len(), expected);
}

#[test]
fn rank_map_csv_has_a_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ranks.csv");
    let out = lagfib(&[
        "elliptic-demo",
        "--input",
        fixture("elliptic_identity.json").to_str().unwrap(),
        "--mode",
        "rank-map",
        "--grid",
        "5",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "re,im,rank");
    assert_eq!(lines.len(), 26);
    assert!(lines[1..].iter().all(|l| l.ends_with(",2")));
}

#[test]
fn leaf_potential_report_passes() {
    let out = lagfib(&[
        "foliation-report",
        "--input",
        fixture("leaf_potential.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_eq!(r["mode"], "exact");
    assert_eq!(r["leaf"]["pass"], true);
    assert_eq!(r["section_compat"]["compatible"], true);
    assert_eq!(r["section_compat"]["pencil_nondegenerate"], false);
}

#[test]
fn fiber_trace_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let out = lagfib(&[
        "foliation-report",
        "--input",
        fixture("fiber_trace.json").to_str().unwrap(),
        "--steps",
        "40",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert!(r["trace"]["affine_residual"].as_f64().unwrap() < 1e-6);
    assert!(r["trace"]["holo_residual"].as_f64().unwrap() < 1e-6);
    let rows = std::fs::read_to_string(csv).unwrap().lines().count();
    assert_eq!(rows, 42);
}

#[test]
fn self_test_filter_runs_only_matching_criteria() {
    let out = lagfib(&["self-test", "--filter", "elliptic"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|l| l.starts_with("[PASS]")));
    assert!(lines.iter().any(|l| l.contains("elliptic-exactness")));
    assert!(!lines.iter().any(|l| l.contains("gordan")));
}

#[test]
fn perturbed_fixture_names_the_failure() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = dir.path().join("fixtures.json");
    std::fs::write(&fixtures, r#"{"lossen_plane": [[1,0,0,0,0],[0,1,0,0,0],[0,0,1,0,0]]}"#).unwrap();
    let out = lagfib(&[
        "self-test",
        "--filter",
        "lossen",
        "--input",
        fixtures.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("[FAIL]") && l.contains("lossen")));
}
