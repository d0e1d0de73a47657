use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};
use tempfile::{tempdir, TempDir};
use tracesynth::export::{render, Format, PredicateStyle, RenderOptions};
use tracesynth::fixtures::fixture;
use tracesynth::io::to_json_text;
use tracesynth::method::{edge_witnesses, replay_structure, verify_edge_predicates};
use tracesynth::model::MachineState;
use tracesynth::program::{run, Program, DEFAULT_FUEL};
use tracesynth::synthesis::{heuristic_coloring, program_from_coloring};
use tracesynth::trace::GeneralizedTrace;

fn tracesynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracesynth")).args(args).env_remove("TRACESYNTH_FUEL").output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Export a fixture into a fresh directory.
fn exported(name: &str) -> (TempDir, PathBuf) {
    let dir = tempdir().unwrap();
    let path = dir.path().join(name);
    let o = tracesynth(&["fixtures", "export", name, path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    (dir, path)
}

fn p(path: &Path, file: &str) -> String {
    path.join(file).display().to_string()
}

fn write(dir: &Path, file: &str, text: &str) -> String {
    let path = dir.join(file);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn csm_tables(dir: &Path) -> Vec<String> {
    ["table2.json", "table3.json", "table4.json", "table5.json"].iter().map(|t| p(dir, t)).collect()
}

fn run_json(m: &tracesynth::model::Model, r: &tracesynth::program::RunResult) -> String {
    to_json_text(&json!({
        "outcome": r.outcome,
        "visited": r.visited,
        "ops": r.ops,
        "trace": r.trace.iter().map(|s| m.state_to_json(s)).collect::<Vec<_>>(),
    }))
}

#[test]
fn run_prints_the_doubling_trace() {
    let (_tmp, dir) = exported("cm2_double");
    let input = write(&dir, "input.json", r#"{"R1": 2, "R2": 1}"#);
    let o = tracesynth(&["run", "-m", &p(&dir, "model.json"), "-p", &p(&dir, "program.json"), "--input", &input]);
    assert_eq!(o.status.code(), Some(0));
    let f = fixture("cm2_double").unwrap();
    let r = run(&f.model, &f.program, &MachineState::ints(&[2, 1]), None, DEFAULT_FUEL);
    assert_eq!(stdout(&o), run_json(&f.model, &r));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["trace"].as_array().unwrap().len(), 8);
    assert_eq!(v["trace"][7], json!({"R1": 0, "R2": 4}));
}

#[test]
fn run_reads_stdin_and_honours_fuel() {
    let (_tmp, dir) = exported("cm2_double");
    let (m, prog) = (p(&dir, "model.json"), p(&dir, "program.json"));
    let mut child = Command::new(env!("CARGO_BIN_EXE_tracesynth"))
        .args(["run", "-m", &m, "-p", &prog, "--input", "-", "--pretty"])
        .env("TRACESYNTH_FUEL", "3")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(br#"{"R1": 2, "R2": 1}"#).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6, "{text}");
    assert!(text.ends_with("outcome: FuelExhausted\n"));

    let input = write(&dir, "input.json", r#"{"R1": 2, "R2": 1}"#);
    let o = tracesynth(&["run", "-m", &m, "-p", &prog, "--input", &input, "--fuel", "100", "--from", "w"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["visited"][0], "w");
    assert_eq!(v["trace"][1], json!({"R1": 2, "R2": 2}));
}

#[test]
fn validate_accepts_table5_and_reports_the_failing_step() {
    let (_tmp, dir) = exported("csm");
    let o = tracesynth(&["validate", "-m", &p(&dir, "model.json"), &p(&dir, "table5.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ok"], true);
    assert_eq!(v["traces"][0]["extended"]["valid"], true);

    let o = tracesynth(&["validate", "-m", &p(&dir, "model.json"), &p(&dir, "table2.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(serde_json::from_slice::<Value>(&o.stdout).unwrap()["traces"][0]["generalization"]["unexplained"], json!([]));

    let (_tmp2, cm) = exported("cm2_double");
    let bad = write(&cm, "bad.json", r#"{"input": {"R1": 0, "R2": 1}, "rows": [{"values": {"R1": 2}}]}"#);
    let o = tracesynth(&["validate", "-m", &p(&cm, "model.json"), &bad]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["traces"][0]["trace"]["failed_step"], 1);
}

#[test]
fn heuristic_synthesis_replays_the_csm_tables() {
    let (_tmp, dir) = exported("csm");
    let out = dir.join("synth.json");
    let mut args = vec!["synthesize".to_string(), "--heuristic".into(), "-m".into(), p(&dir, "model.json")];
    args.extend(csm_tables(&dir));
    args.extend(["-o".to_string(), out.display().to_string()]);
    let o = tracesynth(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let f = fixture("csm").unwrap();
    let xs: Vec<_> = f.traces.iter().map(|t| t.1.to_extended(&f.model).unwrap()).collect();
    let h = heuristic_coloring(&f.model, &xs);
    let lib = program_from_coloring(&f.model, &xs, &h.coloring).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text, lib.to_json_text());
    let synth = Program::from_json_str(&text).unwrap();
    for (name, gt) in &f.traces {
        replay_structure(&f.model, &synth, gt).unwrap_or_else(|e| panic!("{name}: {e}"));
        let r = run(&f.model, &synth, &gt.input, None, DEFAULT_FUEL);
        assert_eq!(r.trace, gt.states(&f.model), "{name}");
    }
    assert!(verify_edge_predicates(&f.model, &synth, &f.trace_list()).ok());
}

#[test]
fn plain_traces_synthesize_the_witness() {
    let (_tmp, dir) = exported("cm2_double");
    let t = write(&dir, "plain.json", r#"{"input": {"R1": 1, "R2": 0}, "rows": [{"values": {"R1": 0}}, {"values": {"R2": 1}}]}"#);
    let o = tracesynth(&["synthesize", "-m", &p(&dir, "model.json"), &t]);
    assert_eq!(o.status.code(), Some(0));
    let prog = Program::from_json_str(&stdout(&o)).unwrap();
    let f = fixture("cm2_double").unwrap();
    assert_eq!(run(&f.model, &prog, &MachineState::ints(&[1, 0]), None, 10).trace.len(), 3);

    let clash = write(&dir, "clash.json", r#"{"input": {"R1": 2, "R2": 0}, "rows": []}"#);
    let o = tracesynth(&["synthesize", "-m", &p(&dir, "model.json"), &t, &clash]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["failure"]["reason"], "mixed_lengths");
}

#[test]
fn verify_matches_the_library_report() {
    let (_tmp, dir) = exported("csm");
    let tables = csm_tables(&dir);
    let mut args = vec!["verify", "-m", &p(&dir, "model.json"), "-p", &p(&dir, "program.json")]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    args.extend(tables.iter().cloned());
    let o = tracesynth(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(1));
    let f = fixture("csm").unwrap();
    let report = verify_edge_predicates(&f.model, &f.program, &f.trace_list());
    let paths: Vec<Value> = f
        .traces
        .iter()
        .map(|(_, g)| json!(replay_structure(&f.model, &f.program, g).unwrap().states))
        .collect();
    let want = json!({
        "ok": false,
        "files": tables,
        "paths": paths,
        "violations": report.violations,
        "failures": report.failures,
        "warnings": report.warnings,
    });
    assert_eq!(stdout(&o), to_json_text(&want));

    let (_tmp2, l) = exported("lindell");
    let o = tracesynth(&[
        "verify",
        "-m",
        &p(&l, "model.json"),
        "-p",
        &p(&l, "program.json"),
        &p(&l, "table8.json"),
        &p(&l, "table9.json"),
        "--pretty",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("ok\n"));
}

#[test]
fn witness_report_matches_the_library() {
    let (_tmp, dir) = exported("csm");
    let tables = csm_tables(&dir);
    let mut args = vec!["report".to_string(), "witnesses".into(), "-m".into(), p(&dir, "model.json"), "-p".into()];
    args.push(p(&dir, "program.json"));
    args.extend(tables.iter().cloned());
    let o = tracesynth(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(0));
    let f = fixture("csm").unwrap();
    let r = edge_witnesses(&f.program, &f.trace_list()).unwrap();
    assert_eq!(stdout(&o), to_json_text(&json!({ "files": tables, "report": r })));

    let comments = write(&dir, "comments.json", r#"{"Start->YES": "empty arrays are not allowed"}"#);
    let o = tracesynth(&["report", "missing", "-p", &p(&dir, "program.json"), "--comments", &comments]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let start_yes = v.as_array().unwrap().iter().find(|e| e["from"] == "Start" && e["to"] == "YES").unwrap();
    assert_eq!(start_yes["comment"], "empty arrays are not allowed");
}

#[test]
fn export_matches_the_library_renderers() {
    for name in ["cm2_double", "csm", "lindell"] {
        let (_tmp, dir) = exported(name);
        let f = fixture(name).unwrap();
        for (flag, format) in [("dot", Format::Dot), ("imperative", Format::Imperative), ("functional", Format::Functional)] {
            let o = tracesynth(&["export", "--format", flag, "-p", &p(&dir, "program.json")]);
            assert_eq!(o.status.code(), Some(0));
            let want = render(&f.program, RenderOptions { format, predicates: PredicateStyle::Symbolic }, &[]);
            assert_eq!(stdout(&o), want, "{name} {flag}");
            assert_eq!(o.stdout, tracesynth(&["export", "--format", flag, "-p", &p(&dir, "program.json")]).stdout);
        }
    }
}

#[test]
fn color_reports_a_minimal_coloring() {
    let (_tmp, dir) = exported("cm2_double");
    let o = tracesynth(&["color", "-m", &p(&dir, "model.json"), &p(&dir, "trace-2-1.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["k"], 5);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 8);
    let o = tracesynth(&["color", "-m", &p(&dir, "model.json"), &p(&dir, "trace-2-1.json"), "-k", "4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fixtures_export_writes_the_embedded_files() {
    let (_tmp, dir) = exported("lindell");
    let f = fixture("lindell").unwrap();
    for (file, text) in f.files() {
        assert_eq!(std::fs::read_to_string(dir.join(file)).unwrap(), text, "{file}");
    }
    let reloaded = GeneralizedTrace::from_json_str(&f.model, &std::fs::read_to_string(dir.join("table9.json")).unwrap());
    assert_eq!(reloaded.unwrap().rows.len(), 6);
    let o = tracesynth(&["fixtures", "list"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[1]["name"], "csm");
    let o = tracesynth(&["fixtures", "export", "nope", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_and_input_errors_exit_with_2() {
    let (_tmp, dir) = exported("cm2_double");
    let bad = write(&dir, "bad.json", "{\n  \"R1\": 2,\n  \"R2\" 1\n}\n");
    let o = tracesynth(&["run", "-m", &p(&dir, "model.json"), "-p", &p(&dir, "program.json"), "--input", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3, column 8"), "{err}");
    assert!(o.stdout.is_empty());

    assert_eq!(tracesynth(&["validate"]).status.code(), Some(2));
    assert_eq!(tracesynth(&["run", "-m", "missing.json", "-p", "x", "--input", "y"]).status.code(), Some(2));
    let input = write(&dir, "input.json", r#"{"R1": 1}"#);
    let o = tracesynth(&["run", "-m", &p(&dir, "model.json"), "-p", &p(&dir, "program.json"), "--input", &input, "--from", "zz"]);
    assert_eq!(o.status.code(), Some(2));
}
