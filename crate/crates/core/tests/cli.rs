use std::path::Path;
use std::process::{Command, Output};

fn univoque(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_univoque")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn analyze_builtin_json() {
    let o = univoque(&["analyze", "builtin:ex1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "complete");
    assert!(v["spectral_radius"].is_object());
    assert!(v.get("timings_ms").is_none());
}

#[test]
fn csv_counts_rows() {
    let o = univoque(&["analyze", "builtin:ex1", "--depth", "6", "--format", "csv-counts"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "k,S,T,N");
    assert_eq!(lines.len(), 7);
    assert!(lines[5].starts_with("5,4,"), "{}", lines[5]);
}

#[test]
fn timings_are_opt_in() {
    let o = univoque(&["analyze", "builtin:cantor", "--timings"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["timings_ms"].is_object());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(
        dir.path(),
        "unknown.json",
        r#"{"dimension":1,"maps":[{"ratio":"1/3","translation":["0"]}],"colour":"red"}"#,
    );
    let bad_ratio =
        write_config(dir.path(), "ratio.json", r#"{"dimension":1,"maps":[{"ratio":"5/4","translation":["0"]}]}"#);
    for path in [unknown.as_str(), bad_ratio.as_str(), "/nonexistent/config.json", "builtin:nope"] {
        let o = univoque(&["analyze", path]);
        assert_eq!(o.status.code(), Some(2), "{path}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    }
    let o = univoque(&["analyze", "builtin:ex1", "--format", "yaml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_invariant_box_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "box.json",
        r#"{"dimension":1,"maps":[{"ratio":"1/3","translation":["0"]},{"ratio":"1/3","translation":["2/3"]}],
            "invariant_box":{"lo":["0"],"hi":["1/2"]}}"#,
    );
    let o = univoque(&["analyze", &path]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn file_config_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "cantor.json",
        r#"{"name":"cantor","dimension":1,"maps":[{"ratio":"1/3","translation":["0"]},{"ratio":"1/3","translation":["2/3"]}],
            "invariant_box":{"lo":["0"],"hi":["1"]}}"#,
    );
    let a = univoque(&["analyze", &path, "--format", "csv-counts"]);
    let b = univoque(&["analyze", "builtin:cantor", "--format", "csv-counts"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn thread_count_does_not_change_output() {
    let one = univoque(&["--threads", "1", "analyze", "builtin:ex4"]);
    let four = univoque(&["--threads", "4", "analyze", "builtin:ex4"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn verify_paper_examples() {
    for name in ["ex2", "ex4", "cantor"] {
        let o = univoque(&["verify-paper", name]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
    }
}

#[test]
fn overlaps_and_gamma_listings() {
    let o = univoque(&["overlaps", "builtin:ex4", "--depth", "3"]);
    assert_eq!(stdout(&o), "f_232 = f_311\n");
    let o = univoque(&["gamma", "builtin:ex4", "--depth", "2"]);
    assert_eq!(stdout(&o), "S_1 (1): 1\nS_2 (1): 21\n");
}

#[test]
fn markdown_report() {
    let o = univoque(&["analyze", "builtin:ex4", "--format", "markdown"]);
    assert_eq!(o.status.code(), Some(0));
    let md = stdout(&o);
    assert!(md.contains("0.73003"), "{md}");
    assert!(md.contains("f_232 = f_311"));
}
