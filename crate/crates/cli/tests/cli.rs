use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spanloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spanloc")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fixtures_pass_every_command() {
    for name in ["collapse", "walking-iso"] {
        for cmd in ["validate", "span", "localize", "bicat", "sset"] {
            let out = spanloc(&[cmd, "--fixture", name]);
            assert_eq!(code(&out), 0, "{cmd} {name}");
            assert_eq!(report(&out)["status"], "pass");
        }
    }
}

#[test]
fn invalid_documents_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"objects":["x","y"],"morphisms":[{"name":"f","dom":"x","cod":"y"},{"name":"g","dom":"x","cod":"y"}],"hypercovers":["f"]}"#;
    let path = write(dir.path(), "bad.json", doc);
    let out = spanloc(&["validate", "--input", &path]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["checks"][1]["detail"]["violations"][0]["clause"], "missing_pullback");
    // The other commands refuse an invalid relative category.
    assert_eq!(code(&spanloc(&["bicat", "--input", &path])), 2);
}

#[test]
fn parse_errors_and_bad_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "broken.json", "{ not json");
    assert_eq!(code(&spanloc(&["validate", "--input", &path])), 2);
    let path = write(dir.path(), "extra.json", r#"{"objects":[],"colour":"red"}"#);
    assert_eq!(code(&spanloc(&["validate", "--input", &path])), 2);
    assert_eq!(code(&spanloc(&["validate", "--fixture", "nope"])), 2);
    assert_eq!(code(&spanloc(&["validate"])), 2);
    let path = write(dir.path(), "ok.json", spanloc::fixtures::fixture("collapse").unwrap());
    assert_eq!(code(&spanloc(&["localize", "--input", &path])), 2);
    assert_eq!(code(&spanloc(&["localize", "--input", &path, "--max-word-len", "8", "--max-iter", "100"])), 0);
}

#[test]
fn budget_and_inconclusive_codes() {
    assert_eq!(code(&spanloc(&["span", "--fixture", "meet-poset", "--level", "3", "--budget", "10"])), 3);
    let out = spanloc(&["localize", "--fixture", "collapse", "--max-word-len", "0", "--max-iter", "10"]);
    assert_eq!(code(&out), 4);
    assert_eq!(report(&out)["status"], "inconclusive");
}

#[test]
fn json_dot_and_timing_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let dot = dir.path().join("span.dot");
    let out = spanloc(&[
        "span",
        "--fixture",
        "cube-poset",
        "--json",
        json.to_str().unwrap(),
        "--emit-dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&json).unwrap(), out.stdout);
    let dot = std::fs::read_to_string(&dot).unwrap();
    assert!(dot.starts_with("digraph sigma_2"));
    assert!(dot.contains("color=blue"));
    assert!(report(&out).get("timing_ms").is_none());
    let timed = spanloc(&["sset", "--fixture", "parallel-pair", "--timing"]);
    assert!(report(&timed)["timing_ms"].is_u64());
}

#[test]
fn horn_kind_selects_the_check() {
    let out = spanloc(&["sset", "--fixture", "parallel-pair", "--kind", "left"]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["checks"][0]["name"], "horn_left");
    assert_eq!(r["checks"][0]["detail"]["witness"]["faces"][0]["simplex"], "f");
    assert_eq!(code(&spanloc(&["sset", "--fixture", "walking-iso", "--kind", "kan"])), 0);
}
