//! Black-box tests of the stag binary: exit codes, output shapes, session
//! persistence, dot validity.

use std::process::{Command, Output};

use stag::render::check_dot;

fn stag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stag"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn translate_simple_sentence() {
    let out = stag(&["translate", "--dir", "ko-en", "ku -ka ku pokose -lul pwunsilhaissta"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "he lost that report");
}

#[test]
fn translate_topic_drop_both_modes() {
    let sentence = "Tom -un pokose -nun pwunsilhaissta -ko malhaissta";
    let out = stag(&["translate", "--dir", "ko-en", sentence]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "Tom said Tom lost the report");

    let out = stag(&["translate", "--dir", "ko-en", "--pronominalize-subjects", sentence]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "Tom said he lost the report");
}

#[test]
fn parse_failure_exits_one() {
    let out = stag(&["parse", "--lang", "ko", "ku -ka ku"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_token_exits_two() {
    let out = stag(&["translate", "--dir", "ko-en", "zzz -ka canta"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_direction_exits_two() {
    let out = stag(&["translate", "--dir", "ko-fr", "ku -ka canta"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_bundled_grammar() {
    let out = stag(&["validate"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn dot_output_is_valid() {
    for args in [
        vec!["parse", "--lang", "en", "--format", "dot", "he wears socks"],
        vec!["parse", "--lang", "ko", "--format", "dot", "--all",
             "ku -ka kunye -ka ssun ku pokose -lul pwunsilhaissta"],
        vec!["translate", "--dir", "ko-en", "--format", "dot",
             "ku -ka ku pokose -lul pwunsilhaissta"],
    ] {
        let out = stag(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let text = stdout(&out);
        for graph in text.split_inclusive("}\n").filter(|g| !g.trim().is_empty()) {
            assert!(check_dot(graph), "invalid dot from {args:?}:\n{graph}");
        }
    }
    assert!(!check_dot("digraph { n0 -> }"));
    assert!(!check_dot("graph { n0; }"));
}

#[test]
fn json_output_parses() {
    let out = stag(&["translate", "--dir", "ko-en", "--format", "json",
                     "ku -ka ku pokose -lul pwunsilhaissta"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["translations"][0]["tokens"][0], "he");
}

#[test]
fn trace_output_is_stable() {
    let args = ["translate", "--dir", "en-ko", "--trace", "he wears socks"];
    let a = stag(&args);
    let b = stag(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    assert!(String::from_utf8_lossy(&a.stderr).contains("rejected"));
}

#[test]
fn session_carries_topics_across_sentences() {
    let dir = std::env::temp_dir().join(format!("stag-session-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let session = dir.join("session.json");
    let session_arg = session.to_str().unwrap();

    let out = stag(&["translate", "--dir", "ko-en", "--session", session_arg,
                     "Tom -un pokose -nun pwunsilhaissta -ko malhaissta"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&session).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let lemmas: Vec<&str> = v["global"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["lemma"].as_str().unwrap())
        .collect();
    assert_eq!(lemmas, vec!["pokose", "Tom"]);

    // a later sentence drops its subject; the session supplies Tom
    let out = stag(&["translate", "--dir", "ko-en", "--session", session_arg, "canta"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "Tom sleeps");

    std::fs::remove_dir_all(&dir).ok();
}
