//! The `anabench` binary end to end: exit codes, outputs and determinism.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use anabench_core::record::read_jsonl;
use anabench_core::semantic::{Distance, StoryItem};
use anabench_core::{EvalRecord, ProblemSet};

fn anabench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anabench"))
        .args(args)
        .current_dir(dir)
        .env_remove("ANABENCH_ENDPOINT")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = anabench(dir, args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn records(path: &Path) -> Vec<EvalRecord> {
    read_jsonl(BufReader::new(std::fs::File::open(path).unwrap())).unwrap()
}

fn table(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|row| row.unwrap().iter().map(str::to_string).collect()).collect()
}

fn write_stories(path: &Path) {
    let items: Vec<StoryItem> = (0..18)
        .flat_map(|g| {
            [Distance::Near, Distance::Far].map(|condition| StoryItem {
                group_id: format!("g{g:02}"),
                source: format!("Source story {g}."),
                correct_target: format!("Correct {condition} target {g}."),
                incorrect_target: format!("Incorrect {condition} target {g}."),
                condition,
            })
        })
        .collect();
    std::fs::write(path, serde_json::to_string(&items).unwrap()).unwrap();
}

#[test]
fn gen_digitmat_counts_and_is_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen", "digitmat", "--subtypes", "exp1", "--n", "40", "--seed", "7", "--out", "a.json"]);
    ok(d.path(), &["gen", "digitmat", "--subtypes", "exp1", "--n", "40", "--seed", "7", "--out", "b.json"]);
    let a = std::fs::read(d.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(d.path().join("b.json")).unwrap());
    assert_eq!(ProblemSet::load(&d.path().join("a.json")).unwrap().problems.len(), 1280);

    ok(d.path(), &["gen", "digitmat", "--subtypes", "exp1", "--n", "40", "--seed", "8", "--out", "c.json"]);
    assert_ne!(a, std::fs::read(d.path().join("c.json")).unwrap());
}

#[test]
fn gen_without_seed_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(anabench(d.path(), &["gen", "digitmat", "--n", "1"]).status.code(), Some(1));
    assert_eq!(anabench(d.path(), &["gen", "letterstring"]).status.code(), Some(1));
    assert_eq!(anabench(d.path(), &["gen", "digitmat", "--subtypes", "nope", "--seed", "1"]).status.code(), Some(1));
    assert_eq!(anabench(d.path(), &["gen", "digitmat", "--seed", "1", "--format", "csv"]).status.code(), Some(1));
    assert_eq!(anabench(d.path(), &["frobnicate"]).status.code(), Some(1));
}

#[test]
fn help_documents_every_command_and_flag() {
    let d = tempfile::tempdir().unwrap();
    let top = String::from_utf8(ok(d.path(), &["--help"]).stdout).unwrap();
    for cmd in ["gen", "solve", "eval", "stats", "serve", "validate-data", "export-prompts", "--format", "--quiet"] {
        assert!(top.contains(cmd), "{cmd} missing from help");
    }
    let eval = String::from_utf8(ok(d.path(), &["eval", "--help"]).stdout).unwrap();
    for flag in ["--family", "--mode", "--model", "--in", "--out", "--cache", "--jobs", "--progressive-runs", "--window"] {
        assert!(eval.contains(flag), "{flag} missing from eval help");
    }
}

#[test]
fn gen_list_prints_the_catalog() {
    let d = tempfile::tempdir().unwrap();
    let out = String::from_utf8(ok(d.path(), &["gen", "digitmat", "--list"]).stdout).unwrap();
    assert_eq!(out.lines().count(), 52);
}

#[test]
fn oracle_pipeline_scores_every_subtype_perfectly() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--quiet", "gen", "digitmat", "--subtypes", "exp1", "--n", "5", "--seed", "11", "--out", "p.json"]);
    let solve = ok(d.path(), &["--quiet", "solve", "--in", "p.json"]);
    let report: serde_json::Value = serde_json::from_slice(&solve.stdout).unwrap();
    assert_eq!(report["summary"]["problems"], 160);
    assert_eq!(report["summary"]["ambiguous"], 0);
    assert_eq!(report["summary"]["mismatched"], 0);

    ok(d.path(), &["--quiet", "eval", "--model", "mock:oracle", "--in", "p.json", "--mode", "both", "--out", "r.jsonl"]);
    assert_eq!(records(&d.path().join("r.jsonl")).len(), 320);
    ok(d.path(), &["--quiet", "stats", "--records", "r.jsonl", "--group", "subtype,mode", "--out", "t.csv"]);
    let rows = table(&d.path().join("t.csv"));
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| r[3] == "1"), "{rows:?}");

    let json = ok(d.path(), &["--quiet", "--format", "json", "stats", "--records", "r.jsonl", "--group", "rule_count"]);
    let t: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(t["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn eval_output_is_reproducible() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--quiet", "gen", "digitmat", "--subtypes", "exp1", "--n", "2", "--seed", "5", "--out", "p.json"]);
    for out in ["a.jsonl", "b.jsonl"] {
        ok(d.path(), &["--quiet", "eval", "--model", "mock:uniform-random:9", "--in", "p.json", "--jobs", "3", "--out", out]);
    }
    assert_eq!(std::fs::read(d.path().join("a.jsonl")).unwrap(), std::fs::read(d.path().join("b.jsonl")).unwrap());
}

#[test]
fn solve_flags_a_corrupted_answer() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--quiet", "gen", "digitmat", "--subtypes", "1r-constant-row", "--n", "3", "--seed", "1", "--out", "p.json"]);
    let path = d.path().join("p.json");
    let mut set = ProblemSet::load(&path).unwrap();
    if let anabench_core::Problem::DigitMatrix(p) = &mut set.problems[1] {
        p.answer = p.choices[(p.correct_choice + 1) % 8].clone();
    }
    set.save(&path).unwrap();
    let out = anabench(d.path(), &["--quiet", "--format", "csv", "solve", "--in", "p.json", "--report", "ambiguity"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");
    assert!(text.lines().nth(1).unwrap().contains("/1,"));
    assert_eq!(anabench(d.path(), &["--quiet", "validate-data", "--problems", "p.json"]).status.code(), Some(1));
}

#[test]
fn letterstring_generation_solve_and_eval() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--quiet", "gen", "letterstring", "--seed", "3", "--per-group", "2", "--out", "l.json"]);
    assert_eq!(ProblemSet::load(&d.path().join("l.json")).unwrap().problems.len(), 56);
    ok(d.path(), &["--quiet", "solve", "--in", "l.json"]);
    ok(d.path(), &["--quiet", "validate-data", "--problems", "l.json"]);
    for format in ["standard", "sentence"] {
        ok(d.path(), &["--quiet", "eval", "--family", "letterstring", "--prompt-format", format, "--model", "mock:oracle", "--in", "l.json", "--out", "r.jsonl"]);
        let recs = records(&d.path().join("r.jsonl"));
        assert_eq!(recs.len(), 56);
        assert!(recs.iter().all(|r| r.correct));
    }
    let out = anabench(d.path(), &["--quiet", "eval", "--family", "letterstring", "--mode", "mc", "--model", "mock:oracle", "--in", "l.json"]);
    assert_eq!(out.status.code(), Some(1));
    // A matrix set is rejected for the letter-string family.
    ok(d.path(), &["--quiet", "gen", "digitmat", "--subtypes", "1r-constant-row", "--n", "1", "--seed", "1", "--out", "m.json"]);
    let out = anabench(d.path(), &["--quiet", "eval", "--family", "letterstring", "--model", "mock:oracle", "--in", "m.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn story_eval_with_always_story_a() {
    let d = tempfile::tempdir().unwrap();
    write_stories(&d.path().join("s.json"));
    ok(d.path(), &["--quiet", "validate-data", "--stories", "s.json"]);
    ok(d.path(), &["--quiet", "eval", "--family", "story", "--model", "mock:fixed-text:Story A", "--in", "s.json", "--out", "r.jsonl"]);
    let recs = records(&d.path().join("r.jsonl"));
    assert_eq!((recs.len(), recs.iter().filter(|r| r.correct).count()), (72, 36));
    ok(d.path(), &["--quiet", "stats", "--records", "r.jsonl", "--group", "condition", "--out", "t.csv"]);
    let rows = table(&d.path().join("t.csv"));
    assert_eq!(rows.iter().map(|r| (r[0].as_str(), r[1].as_str(), r[2].as_str())).collect::<Vec<_>>(), [("far", "18", "36"), ("near", "18", "36")]);
}

#[test]
fn progressive_runs_respect_the_window() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--quiet", "gen", "digitmat", "--subtypes", "exp2", "--n", "2", "--seed", "4", "--out", "p.json"]);
    ok(d.path(), &["--quiet", "eval", "--model", "mock:oracle", "--in", "p.json", "--progressive-runs", "2", "--window", "512", "--out", "r.jsonl"]);
    let recs = records(&d.path().join("r.jsonl"));
    assert_eq!(recs.len(), 84);
    assert!(recs.iter().all(|r| r.correct));
    assert_eq!(anabench(d.path(), &["--quiet", "eval", "--family", "story", "--model", "mock:oracle", "--in", "p.json", "--progressive-runs", "1"]).status.code(), Some(1));
}

#[test]
fn unknown_mock_and_missing_endpoint_are_usage_errors() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--quiet", "gen", "digitmat", "--subtypes", "1r-constant-row", "--n", "1", "--seed", "1", "--out", "p.json"]);
    assert_eq!(anabench(d.path(), &["eval", "--model", "mock:psychic", "--in", "p.json"]).status.code(), Some(1));
    assert_eq!(anabench(d.path(), &["eval", "--model", "some-model", "--in", "p.json"]).status.code(), Some(1));
    assert_eq!(anabench(d.path(), &["eval", "--model", "mock:oracle", "--in", "absent.json"]).status.code(), Some(1));
}

#[test]
fn failing_endpoint_is_a_runtime_error_with_records() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--quiet", "gen", "digitmat", "--subtypes", "1r-constant-row", "--n", "1", "--seed", "1", "--out", "p.json"]);
    // A listener that answers every request with 401, which is not retried.
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let mut s = stream.unwrap();
            let mut buf = [0u8; 8192];
            let _ = s.read(&mut buf);
            let _ = s.write_all(b"HTTP/1.1 401 Unauthorized\r\ncontent-length: 2\r\nconnection: close\r\n\r\nno");
        }
    });
    let url = format!("http://{addr}/v1");
    let out = anabench(d.path(), &["--quiet", "eval", "--model", "m", "--endpoint", &url, "--mode", "gen", "--in", "p.json", "--out", "r.jsonl"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&d.path().join("r.jsonl"));
    assert_eq!(recs.len(), 1);
    assert!(recs[0].has_flag(anabench_core::RecordFlag::Error));
}

#[test]
fn cache_replays_completions() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--quiet", "gen", "digitmat", "--subtypes", "exp1", "--n", "1", "--seed", "2", "--out", "p.json"]);
    ok(d.path(), &["--quiet", "eval", "--model", "mock:oracle", "--in", "p.json", "--cache", "cache", "--out", "a.jsonl"]);
    let cached = std::fs::read_dir(d.path().join("cache")).unwrap().count();
    assert!(cached >= 32 * 9, "{cached}");
    ok(d.path(), &["--quiet", "eval", "--model", "mock:oracle", "--in", "p.json", "--cache", "cache", "--out", "b.jsonl"]);
    assert_eq!(std::fs::read_dir(d.path().join("cache")).unwrap().count(), cached);
    assert_eq!(std::fs::read(d.path().join("a.jsonl")).unwrap(), std::fs::read(d.path().join("b.jsonl")).unwrap());
}

#[test]
fn export_prompts_writes_every_file() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["export-prompts", "--out", "prompts"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 11);
    assert_eq!(std::fs::read_dir(d.path().join("prompts")).unwrap().count(), 11);
}

#[test]
fn validate_data_requires_an_input() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(anabench(d.path(), &["validate-data"]).status.code(), Some(1));
    assert_eq!(anabench(d.path(), &["validate-data", "--verbal", "v.json"]).status.code(), Some(1));
    std::fs::write(d.path().join("bad.json"), "[]").unwrap();
    assert_eq!(anabench(d.path(), &["--quiet", "validate-data", "--stories", "bad.json"]).status.code(), Some(1));
}

fn http(addr: &str, request: &str) -> String {
    let mut s = TcpStream::connect(addr).unwrap();
    s.write_all(request.as_bytes()).unwrap();
    let mut text = String::new();
    s.read_to_string(&mut text).unwrap();
    text
}

#[test]
fn serve_answers_session_requests() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--quiet", "gen", "digitmat", "--subtypes", "exp1", "--n", "1", "--seed", "6", "--out", "p.json"]);
    let mut child = Command::new(env!("CARGO_BIN_EXE_anabench"))
        .args(["serve", "--port", "0", "--dataset", "p.json", "--store", "store"])
        .current_dir(d.path())
        .env("RUST_LOG", "info")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let addr = lines
        .by_ref()
        .map_while(Result::ok)
        .find_map(|l| l.split("listening on http://").nth(1).map(str::to_string))
        .expect("server announces its address");
    let body = r#"{"experiment":"DigitMat32","seed":1}"#;
    let created = http(
        &addr,
        &format!("POST /sessions HTTP/1.1\r\nhost: x\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}", body.len()),
    );
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(created.starts_with("HTTP/1.1 201"), "{created}");
    assert!(created.contains("\"trial_count\":32"), "{created}");
    assert!(d.path().join("store").join("events.jsonl").exists());
}

#[test]
fn serve_rejects_invalid_materials() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("p.json"), "{").unwrap();
    assert_eq!(anabench(d.path(), &["--quiet", "serve", "--port", "0", "--dataset", "p.json"]).status.code(), Some(1));
}
