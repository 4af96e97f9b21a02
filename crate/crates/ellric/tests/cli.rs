use std::io::Write;
use std::process::{Command, Output, Stdio};

fn ellric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellric")).args(args).env_remove("ELLRIC_SEED").output().unwrap()
}

fn ellric_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ellric"))
        .args(args)
        .env_remove("ELLRIC_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const CONSTANT: &str = r#"{
  "schema_version": "1",
  "tau": [0, 1],
  "h": [0.31, 0.17],
  "a": { "kind": "constant", "value": [0, 0] },
  "b": { "kind": "constant", "value": [1, 0] }
}"#;

#[test]
fn eval_theta_at_zero() {
    let o = ellric(&["eval", "theta", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn eval_prints_fifteen_digits() {
    let o = ellric(&["eval", "wp", "0.5"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let digits = s.trim().chars().filter(|c| c.is_ascii_digit()).count();
    assert!((14..=16).contains(&digits), "{s}");
}

#[test]
fn torsion_of_a_half_period() {
    let o = ellric(&["torsion", "(1+tau)/2"]);
    assert_eq!(stdout(&o).trim(), "2");
    let o = ellric(&["torsion", "0.31+0.17i", "--nmax", "64"]);
    assert_eq!(stdout(&o).trim(), "none up to 64");
}

#[test]
fn classify_constant_document() {
    let o = ellric_stdin(&["classify", "-"], CONSTANT);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["group_rendering"], "completely_reducible_non_scalar");
    assert_eq!(v["certificates"]["first"]["solutions"].as_array().unwrap().len(), 2);
}

#[test]
fn seed_flag_beats_environment() {
    let run = |args: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ellric"));
        cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped());
        match env {
            Some(v) => cmd.env("ELLRIC_SEED", v),
            None => cmd.env_remove("ELLRIC_SEED"),
        };
        let mut child = cmd.spawn().unwrap();
        child.stdin.take().unwrap().write_all(CONSTANT.as_bytes()).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&child.wait_with_output().unwrap().stdout).unwrap();
        v["certificates"]["seed"].as_u64().unwrap()
    };
    assert_eq!(run(&["classify", "-"], Some("77")), 77);
    assert_eq!(run(&["classify", "-", "--seed", "5"], Some("77")), 5);
}

#[test]
fn bad_documents_exit_with_one() {
    let o = ellric_stdin(&["classify", "-"], &CONSTANT.replace("\"tau\"", "\"tua\""));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("tua") && err.contains("line"), "{err}");
    let o = ellric_stdin(&["classify", "-"], &CONSTANT.replace("[1, 0]", "[0, 0]"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("b.value"));
    let extra = CONSTANT.replace(r#""value": [1, 0]"#, r#""value": [1, 0], "scale": 2"#);
    assert_eq!(ellric_stdin(&["classify", "-"], &extra).status.code(), Some(1));
}

#[test]
fn torsion_shift_is_an_input_error() {
    let o = ellric(&["classify", "--lame", "1,0,0.25"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn lame_riccati_passes() {
    let o = ellric(&["riccati", "--lame", "1,0,0.31+0.17i", "--imprimitivity"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"]["tag"], "no_solution_certificate");
    let p3 = v["p3_base"]["points"].as_array().unwrap();
    assert_eq!(p3.len(), 3);
    assert!(p3.iter().all(|p| p["mult"] == 2));
    assert_eq!(v["p2_base"]["points"].as_array().unwrap().len(), 5);
}

#[test]
fn reducible_riccati_lists_the_unit_solution() {
    let doc = CONSTANT
        .replace(
            r#"{ "kind": "constant", "value": [0, 0] }"#,
            r#"{ "kind": "wp_linear", "alpha": [1, 0], "beta": [0, 0] }"#,
        )
        .replace(
            r#"{ "kind": "constant", "value": [1, 0] }"#,
            r#"{ "kind": "wp_linear", "alpha": [-1, 0], "beta": [-1, 0] }"#,
        );
    let o = ellric_stdin(&["riccati", "-"], &doc);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sols = v["outcome"]["solutions"].as_array().unwrap();
    assert!(sols.iter().any(|s| s["divisor"]["points"].as_array().unwrap().is_empty()
        && (s["constant"][0].as_f64().unwrap() - 1.0).abs() < 1e-8));
}

#[test]
fn family7_helper_and_output_file() {
    let dir = std::env::temp_dir().join(format!("ellric-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("verdict.json");
    let o =
        ellric(&["classify", "--family7", "-0.5+0.8660254037844386i,1,0,0.31+0.17i", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["group_rendering"], "mu_6.SL2");
    assert_eq!(v["verdict"]["value"], 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn selftest_subset_passes() {
    let o = ellric(&["selftest", "--only", "1,6,10"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(ellric(&["classify"]).status.code(), Some(1));
    assert_eq!(ellric(&["eval", "zeta", "0.3"]).status.code(), Some(1));
    assert_eq!(ellric(&["--help"]).status.code(), Some(0));
}

#[test]
fn sample_problems_round_trip_and_classify() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let doc = ellric::doc::ProblemDocument::parse(&text).unwrap();
        let normal = doc.to_json();
        assert_eq!(ellric::doc::ProblemDocument::parse(&normal).unwrap().to_json(), normal);
        let o = ellric(&["classify", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 5);
}
