use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dgonlab")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("utf8"))
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let (code, text) = run(args);
    (code, serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}")))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_annulus_counts() {
    let (code, v) = run_json(&["validate", path(&fixture("ann4"))]);
    assert_eq!(code, 0);
    assert_eq!((v["g"].as_u64(), v["b"].as_u64(), v["c"].as_u64()), (Some(0), Some(2), Some(6)));
    assert_eq!((v["m"].as_u64(), v["n"].as_u64()), (Some(3), Some(3)));
}

#[test]
fn verify_commute_passes_on_a3() {
    let (code, v) = run_json(&["verify-commute", path(&fixture("a3")), "--arc", "1", "--mode", "sign-relaxed"]);
    assert_eq!(code, 0);
    assert_eq!(v["passed"], true);
    assert_eq!(v["mode"], "sign-relaxed");
}

#[test]
fn unknown_arc_is_a_domain_error() {
    let (code, v) = run_json(&["flip", path(&fixture("a3")), "--arc", "99"]);
    assert_eq!(code, 1);
    assert_eq!(v["code"], "unknown_arc");
    assert!(v["message"].as_str().unwrap().contains("unknown arc"));
    assert_eq!(v["context"]["arc"], "99");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["flip", path(&fixture("a3"))]).0, 2);
    assert_eq!(run(&["verify-commute", path(&fixture("a3")), "--arc", "1", "--all-arcs"]).0, 2);
    assert_eq!(run(&["mutate", path(&fixture("a3")), "--arc", "1", "--mode", "bogus"]).0, 2);
    assert_eq!(run(&["no-such-command"]).0, 2);
}

#[test]
fn unreadable_and_malformed_inputs_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let (code, v) = run_json(&["validate", bad.to_str().unwrap()]);
    assert_eq!((code, v["code"].as_str()), (1, Some("parse")));
    let (code, v) = run_json(&["validate", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!((code, v["code"].as_str()), (1, Some("io")));
}

#[test]
fn all_arcs_output_is_identical_across_runs_and_job_counts() {
    let f = fixture("disk4");
    let (c1, one) = run(&["verify-commute", path(&f), "--all-arcs"]);
    let (c2, three) = run(&["verify-commute", path(&f), "--all-arcs", "--jobs", "3"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(one, three);
    let v: Value = serde_json::from_str(&one).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 4);
    assert_eq!(v["mode"], "sign-relaxed");
}

#[test]
fn qsp_output_feeds_ginzburg() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.json");
    assert_eq!(run(&["qsp", path(&fixture("self4")), "--out", q.to_str().unwrap()]).0, 0);
    let from_qsp = run(&["ginzburg", q.to_str().unwrap()]);
    let from_surface = run(&["ginzburg", path(&fixture("self4"))]);
    assert_eq!(from_qsp.0, 0);
    assert_eq!(from_qsp, from_surface);
}

#[test]
fn flip_output_is_a_surface_and_returns_after_d_minus_1_flips() {
    let dir = tempfile::tempdir().unwrap();
    let once = dir.path().join("once.json");
    assert_eq!(run(&["flip", path(&fixture("disk4")), "--arc", "1", "--out", once.to_str().unwrap()]).0, 0);
    let (code, v) = run_json(&["validate", once.to_str().unwrap()]);
    assert_eq!((code, v["m"].as_u64()), (0, Some(5)));
    let (code, v) = run_json(&["orbit", path(&fixture("disk4")), "--arc", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["period"], 3);
}

#[test]
fn reduced_output_is_already_minimal() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let r = dir.path().join("r.json");
    let mu = dir.path().join("mu.json");
    assert_eq!(run(&["mutate", path(&fixture("a3")), "--arc", "1", "--mode", "oppermann", "--out", mu.to_str().unwrap()]).0, 0);
    assert_eq!(run(&["ginzburg", mu.to_str().unwrap(), "--out", g.to_str().unwrap()]).0, 0);
    assert_eq!(run(&["reduce", g.to_str().unwrap(), "--complete", "--out", r.to_str().unwrap()]).0, 0);
    let (code, v) = run_json(&["reduce", r.to_str().unwrap(), "--complete"]);
    assert_eq!(code, 0);
    assert!(v["trace"]["steps"].as_array().unwrap().is_empty());
}

#[test]
fn surface_mutation_of_a3_has_no_potential() {
    let (code, v) = run_json(&["mutate", path(&fixture("a3")), "--arc", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["mode"], "surface");
    assert!(v["potential"].as_array().unwrap().is_empty());
    assert_eq!(v["arrows"].as_array().unwrap().len(), 4);
}

#[test]
fn homology_certifies_a_pentagon_class() {
    let class = r#"[{"path":["a_{1+,1-}","a_{1+,1-}"],"coeff":"1"}]"#;
    let (code, v) = run_json(&["homology", path(&fixture("pent5")), "--degree", "-2", "--length", "4", "--class", class]);
    assert_eq!(code, 0);
    assert_eq!(v["class"]["verdict"], "certified");
    assert_eq!(v["cohomology"]["dim"], 2);
}

#[test]
fn all_signs_lists_sign_choices() {
    let (code, v) = run_json(&["qsp", path(&fixture("disk4")), "--all-signs"]);
    assert_eq!(code, 0);
    assert!(!v["choices"].as_array().unwrap().is_empty());
}
