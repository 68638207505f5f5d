use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/corpus")
        .join(name)
        .display()
        .to_string()
}

fn langcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_langcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_exit_codes() {
    let ok = langcert(&["check", &fixture("stlc_cbv.mod")]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok).trim(), "stlc_cbv: certified");

    let bad = langcert(&["check", &fixture("mut_if_branch.mod")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("error E210"));

    let syntax = langcert(&["check", &fixture("mut_syntax.mod")]);
    assert_eq!(syntax.status.code(), Some(2));

    let missing = langcert(&["check", "/nonexistent/lang.mod"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("E001"));
}

#[test]
fn check_json_report() {
    let o = langcert(&["check", "--json", &fixture("mut_head_tail.mod")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "rejected");
    assert_eq!(v["diagnostics"][0]["code"], "E300");
}

#[test]
fn explain_prints_the_title() {
    let o = langcert(&["check", "--explain", &fixture("mut_cons_cycle.mod")]);
    assert!(stderr(&o).contains("E201"));
    let e = langcert(&["explain", "E210"]);
    assert_eq!(e.status.code(), Some(0));
    assert!(stdout(&e).starts_with("E210: "));
    assert_eq!(langcert(&["explain", "E999"]).status.code(), Some(2));
}

#[test]
fn run_and_typeof() {
    let f = fixture("stlc_cbv.mod");
    let r = langcert(&["run", &f, "--expr", "if tt (app (abs bool (x\\ x)) ff) tt"]);
    assert_eq!(r.status.code(), Some(0));
    let lines: Vec<String> = stdout(&r).lines().map(String::from).collect();
    assert_eq!(lines.last().map(String::as_str), Some("value"));
    assert_eq!(lines[lines.len() - 2], "ff");

    let t = langcert(&["typeof", &f, "--expr", "abs bool (x\\ x)"]);
    assert_eq!(stdout(&t).trim(), "arrow bool bool");
    let u = langcert(&["typeof", &f, "--expr", "app tt tt"]);
    assert_eq!((u.status.code(), stdout(&u).trim().to_string()), (Some(1), "untypable".into()));
}

#[test]
fn run_reports_stuck_terms() {
    let r = langcert(&["run", &fixture("mut_head_nil.mod"), "--expr", "head nil"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stdout(&r).ends_with("stuck\n"));
}

#[test]
fn fuzz_sound_and_unsound() {
    let ok = langcert(&["fuzz", &fixture("stlc_cbv.mod"), "--count", "50"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = langcert(&["fuzz", &fixture("mut_head_tail.mod"), "--json"]);
    assert_eq!(bad.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert!(!v["preservation_violations"].as_array().unwrap().is_empty());
}

#[test]
fn certify_writes_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cert.txt");
    let o = langcert(&["certify", &fixture("lists.mod"), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("== VERDICT ==\nlanguage: lists\nverdict: certified\n"));
}

#[test]
fn corpus_of_an_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.txt");
    std::fs::write(&manifest, "").unwrap();
    let o = langcert(&["corpus", dir.path().to_str().unwrap(), "--manifest", manifest.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["entries"], serde_json::json!([]));
}

#[test]
fn corpus_mismatch_fails() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("mut_if_branch.mod"), dir.path().join("a.mod")).unwrap();
    let manifest = dir.path().join("manifest.txt");
    std::fs::write(&manifest, "a.mod certified\n").unwrap();
    let o = langcert(&["corpus", dir.path().to_str().unwrap(), "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("MISMATCH"));
}
