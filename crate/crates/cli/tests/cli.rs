use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ecostruct"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn replay_run(out: &Path, formats: &str) -> Output {
    let f = fixtures();
    run(&[
        "run",
        "--corpus",
        s(&f.join("corpus.jsonl")),
        "--config",
        s(&f.join("config.toml")),
        "--backend",
        "replay",
        "--replay-file",
        s(&f.join("replay.jsonl")),
        "--formats",
        formats,
        "--out",
        s(out),
    ])
}

fn line_count(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn help_for_every_subcommand() {
    assert!(run(&["--help"]).status.success());
    for sub in ["run", "score", "compare", "sweep", "report", "convert", "validate"] {
        let out = run(&[sub, "--help"]);
        assert!(out.status.success(), "{sub}");
        assert!(!out.stdout.is_empty(), "{sub}");
    }
}

#[test]
fn replay_run_writes_one_record_per_instance_and_format() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two");
    assert!(replay_run(&two, "json,toon").status.success());
    assert_eq!(line_count(&two.join("records.jsonl")), 24);
    assert!(!two.join("records.jsonl.partial").exists());
    assert!(!two.join(".ecostruct.lock").exists());

    let all = dir.path().join("all");
    assert!(replay_run(&all, "json,xml,yaml,toon").status.success());
    assert_eq!(line_count(&all.join("records.jsonl")), 48);
}

#[test]
fn replay_without_file_is_a_usage_error() {
    let f = fixtures();
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "run",
        "--corpus",
        s(&f.join("corpus.jsonl")),
        "--backend",
        "replay",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_endpoint_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(
        &corpus,
        r#"{"instance_id":"a","description":"d","expected":{"k":1},"formats":["json"]}"#,
    )
    .unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        "[backend]\nurl = \"http://127.0.0.1:9/v1/chat/completions\"\nattempts = 1\ntimeout_s = 5\n",
    )
    .unwrap();
    let out = run(&[
        "run",
        "--corpus",
        s(&corpus),
        "--config",
        s(&config),
        "--backend",
        "http",
        "--formats",
        "json",
        "--out",
        s(&dir.path().join("out")),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

fn score_args<'a>(f: &'a Path, extra: &[&'a str]) -> Vec<String> {
    let mut v: Vec<String> = vec![
        "--records".into(),
        s(&f.join("golden/records.jsonl")).into(),
        "--corpus".into(),
        s(&f.join("corpus.jsonl")).into(),
    ];
    v.extend(extra.iter().map(|x| x.to_string()));
    v
}

#[test]
fn weights_not_summing_to_one_are_rejected() {
    let f = fixtures();
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["score".to_string()];
    args.extend(score_args(
        &f,
        &["--alpha", "0.3", "--beta", "0.8", "--out", s(dir.path())],
    ));
    let out = bin().args(&args).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn scores_jsonl(out: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(out.join("scores.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn gamma_zero_leaves_gcs_unchanged() {
    let f = fixtures();
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["score".to_string()];
    args.extend(score_args(&f, &["--gamma", "0", "--out", s(dir.path())]));
    let out = bin().args(&args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = scores_jsonl(dir.path());
    assert_eq!(lines.len(), 48);
    for l in lines {
        assert_eq!(l["gcs_env"], l["gcs"], "{l}");
    }
}

#[test]
fn compare_and_sweep_print_tables() {
    let f = fixtures();
    let mut args = vec!["compare".to_string()];
    args.extend(score_args(&f, &["--metrics", "gcs,n_tokens"]));
    let out = bin().args(&args).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("n_tokens"));

    let mut args = vec!["sweep".to_string()];
    args.extend(score_args(&f, &["--steps", "5"]));
    let out = bin().args(&args).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("cross at gamma*"), "{text}");

    let mut args = vec!["sweep".to_string()];
    args.extend(score_args(&f, &["--steps", "1"]));
    assert_eq!(bin().args(&args).output().unwrap().status.code(), Some(2));
}

#[test]
fn convert_json_to_tabular_toon() {
    let out = run_with_stdin(
        &["convert", "--from", "json", "--to", "toon"],
        r#"{"users":[{"id":1,"name":"A"},{"id":2,"name":"B"}],"ok":true}"#,
    );
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "users[2]{id,name}:\n  1,A\n  2,B\nok: true\n"
    );
}

#[test]
fn convert_examples() {
    let out = run_with_stdin(
        &["convert", "--from", "json", "--to", "toon"],
        r#"{"users":[{"id":1,"name":"Alice"},{"id":2,"name":"Bob"}]}"#,
    );
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "users[2]{id,name}:\n  1,Alice\n  2,Bob\n"
    );
    let out = run_with_stdin(&["convert", "--from", "json", "--to", "json"], r#"{"a":1}"#);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "{\"a\":1}\n");
}

#[test]
fn convert_round_trips_through_every_format() {
    // XML leaves are untyped, so every scalar here is a string.
    let json = r#"{"doc":{"title":"T","tags":["a","b"],"n":"3"}}"#;
    for fmt in ["xml", "yaml", "toon"] {
        let there = run_with_stdin(&["convert", "--from", "json", "--to", fmt], json);
        assert!(there.status.success(), "{fmt}");
        let back = run_with_stdin(
            &["convert", "--from", fmt, "--to", "json"],
            &String::from_utf8(there.stdout).unwrap(),
        );
        assert!(back.status.success(), "{fmt}");
        assert_eq!(String::from_utf8(back.stdout).unwrap().trim_end(), json, "{fmt}");
    }
}

#[test]
fn convert_failures() {
    let malformed = run_with_stdin(&["convert", "--from", "json", "--to", "toon"], "{\"a\":");
    assert_eq!(malformed.status.code(), Some(1));
    let multi_root = run_with_stdin(&["convert", "--from", "json", "--to", "xml"], r#"{"a":1,"b":2}"#);
    assert_eq!(multi_root.status.code(), Some(2));
}

#[test]
fn validate_toon() {
    let ok = run_with_stdin(&["validate"], "items[2]: a,b\n");
    assert!(ok.status.success());
    assert_eq!(String::from_utf8(ok.stdout).unwrap(), "valid toon\n");
    let bad = run_with_stdin(&["validate"], "items[3]: a,b\n");
    assert_eq!(bad.status.code(), Some(1));
    let tabs = run_with_stdin(&["validate", "--delimiter", "\t"], "items[2]: a\tb\n");
    assert!(tabs.status.success(), "{}", String::from_utf8_lossy(&tabs.stderr));
    let yaml = run_with_stdin(&["validate", "--format", "yaml"], "a: [1\n");
    assert_eq!(yaml.status.code(), Some(1));
}

#[test]
fn pipeline_matches_goldens() {
    let f = fixtures();
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    assert!(replay_run(&run_dir, "json,xml,yaml,toon").status.success());
    let records = run_dir.join("records.jsonl");
    let corpus = f.join("corpus.jsonl");
    let common = ["--records", s(&records), "--corpus", s(&corpus)];
    let score_dir = dir.path().join("score");
    let report_dir = dir.path().join("report");
    let mut a = vec!["score"];
    a.extend(common);
    a.extend(["--out", s(&score_dir)]);
    assert!(run(&a).status.success());
    let mut a = vec!["report"];
    a.extend(common);
    a.extend(["--out", s(&report_dir)]);
    assert!(run(&a).status.success());

    let golden = f.join("golden");
    let pairs = [
        (records.clone(), "records.jsonl"),
        (score_dir.join("scores.jsonl"), "scores.jsonl"),
        (report_dir.join("summary.csv"), "summary.csv"),
        (report_dir.join("pairs.csv"), "pairs.csv"),
        (report_dir.join("gamma_sweep.csv"), "gamma_sweep.csv"),
        (report_dir.join("gamma_crossing.csv"), "gamma_crossing.csv"),
    ];
    for (got, name) in pairs {
        assert_eq!(
            std::fs::read(&got).unwrap(),
            std::fs::read(golden.join(name)).unwrap(),
            "{name} differs from golden"
        );
    }
}

#[test]
fn locked_output_directory_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join(".ecostruct.lock"), "").unwrap();
    let out = replay_run(dir.path(), "json");
    assert_eq!(out.status.code(), Some(1));
}
