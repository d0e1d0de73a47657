use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value as Json};
use thiserror::Error;
use tracesynth::export::{render, Format, PredicateStyle, RenderOptions};
use tracesynth::fixtures::{fixture, FIXTURE_NAMES};
use tracesynth::io::{to_json_text, LoadError};
use tracesynth::method::{
    edge_witnesses, missing_edges, replay_structure, verify_edge_predicates, verify_generalization,
};
use tracesynth::model::{MachineState, Model};
use tracesynth::program::{run as run_program, Program, RunResult};
use tracesynth::synthesis::{
    heuristic_coloring, is_consistent, minimal_program, program_from_coloring, restricted_coloring, synthesize_k,
    trace_graph,
};
use tracesynth::trace::{validate_extended, validate_trace, ExtendedTrace, GeneralizedTrace};

use crate::input;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}: {1}")]
    Load(String, LoadError),
    #[error("{0}")]
    Usage(String),
}

/// A command result: JSON by default, an optional table for `--pretty`, or
/// plain text for renderers.
pub struct Output {
    pub ok: bool,
    body: Body,
    table: Option<String>,
}

enum Body {
    Json(Json),
    Text(String),
}

impl Output {
    fn json(ok: bool, value: impl Serialize) -> Self {
        Output { ok, body: Body::Json(serde_json::to_value(value).expect("serializable report")), table: None }
    }

    fn with_table(mut self, table: String) -> Self {
        self.table = Some(table);
        self
    }

    pub fn render(&self, pretty: bool) -> String {
        match (&self.table, &self.body) {
            (Some(t), _) if pretty => t.clone(),
            (_, Body::Text(t)) => t.clone(),
            (_, Body::Json(j)) => to_json_text(j),
        }
    }
}

fn names(paths: &[impl AsRef<Path>]) -> Vec<String> {
    paths.iter().map(|p| p.as_ref().display().to_string()).collect()
}

pub fn validate(model: &Path, traces: &[impl AsRef<Path>]) -> Result<Output, CliError> {
    let m = input::model(model)?;
    let gts = input::traces(&m, traces)?;
    let mut reports = Vec::new();
    let mut all_ok = true;
    let mut table = String::new();
    for (name, gt) in names(traces).into_iter().zip(&gts) {
        let states = gt.states(&m);
        let plain = validate_trace(&m, &states);
        let extended = gt.to_extended(&m).map(|xt| validate_extended(&m, &xt));
        let generalized = gt.rows.iter().any(|r| !r.exprs.is_empty()).then(|| verify_generalization(&m, gt));
        let ok = plain.valid && extended.as_ref().map_or(true, |e| e.valid) && generalized.as_ref().map_or(true, |g| g.ok());
        all_ok &= ok;
        let step = plain.failed_step.or(extended.as_ref().and_then(|e| e.failed_step));
        let _ = writeln!(
            table,
            "{name}: {} ({} rows{})",
            if ok { "valid" } else { "INVALID" },
            gt.rows.len(),
            step.map(|s| format!(", fails at step {s}")).unwrap_or_default()
        );
        reports.push(json!({
            "file": name,
            "rows": gt.rows.len(),
            "ok": ok,
            "trace": plain,
            "extended": extended,
            "generalization": generalized,
        }));
    }
    Ok(Output::json(all_ok, json!({ "ok": all_ok, "traces": reports })).with_table(table))
}

pub fn run_report(m: &Model, r: &RunResult) -> Json {
    json!({
        "outcome": r.outcome,
        "visited": r.visited,
        "ops": r.ops,
        "trace": r.trace.iter().map(|s| m.state_to_json(s)).collect::<Vec<_>>(),
    })
}

fn state_table(m: &Model, r: &RunResult) -> String {
    let vars: Vec<&str> = m.variables().iter().map(|v| v.name.as_str()).collect();
    let mut rows: Vec<Vec<String>> = vec![std::iter::once("#".to_string())
        .chain(std::iter::once("op".into()))
        .chain(vars.iter().map(|v| v.to_string()))
        .collect()];
    for (i, s) in r.trace.iter().enumerate() {
        let op = if i == 0 { String::new() } else { r.ops[i - 1].clone() };
        let cells = vars.iter().map(|v| m.get(s, v).map(|x| x.to_string()).unwrap_or_default());
        rows.push(std::iter::once(i.to_string()).chain(std::iter::once(op)).chain(cells).collect());
    }
    let widths: Vec<usize> =
        (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in &rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    let _ = writeln!(out, "outcome: {:?}", r.outcome);
    out
}

pub fn run(
    model: &Path,
    program: &Path,
    state: &Path,
    fuel: Option<u64>,
    from: Option<&str>,
) -> Result<Output, CliError> {
    let m = input::model(model)?;
    let p = input::program(program, Some(&m))?;
    let j = input::json(state)?;
    let s: MachineState =
        m.state_from_json(&j).map_err(|e| CliError::Load(state.display().to_string(), LoadError::Invalid(e)))?;
    if let Some(f) = from {
        if p.index_of(f).is_none() {
            return Err(CliError::Usage(format!("no program state named `{f}`")));
        }
    }
    let r = run_program(&m, &p, &s, from, input::fuel(fuel)?);
    Ok(Output::json(r.terminated(), run_report(&m, &r)).with_table(state_table(&m, &r)))
}

fn extended(m: &Model, gts: &[GeneralizedTrace]) -> Option<Vec<ExtendedTrace>> {
    gts.iter().map(|g| g.to_extended(m)).collect()
}

pub fn synthesize(
    model: &Path,
    traces: &[impl AsRef<Path>],
    k: Option<usize>,
    heuristic: bool,
    output: Option<&Path>,
) -> Result<Output, CliError> {
    let m = input::model(model)?;
    let gts = input::traces(&m, traces)?;
    let (program, method) = match extended(&m, &gts) {
        None => {
            if k.is_some() || heuristic {
                return Err(CliError::Usage("-k and --heuristic need traces with operation names".into()));
            }
            let plain: Vec<Vec<MachineState>> = gts.iter().map(|g| g.states(&m)).collect();
            let c = is_consistent(&m, &plain);
            match c.witness {
                Some(w) => (w, "witness"),
                None => return Ok(Output::json(false, json!({ "ok": false, "method": "witness", "failure": c.failure }))),
            }
        }
        Some(xs) if heuristic => {
            let h = heuristic_coloring(&m, &xs);
            if !h.ok() {
                return Ok(Output::json(false, json!({ "ok": false, "method": "heuristic", "conflicts": h })));
            }
            let p = program_from_coloring(&m, &xs, &h.coloring).map_err(|e| CliError::Usage(e.to_string()))?;
            (p, "heuristic")
        }
        Some(xs) => match k {
            Some(k) => match synthesize_k(&m, &xs, k) {
                Some(p) => (p, "bounded"),
                None => return Ok(Output::json(false, json!({ "ok": false, "method": "bounded", "k": k }))),
            },
            None => match minimal_program(&m, &xs) {
                Ok((p, _)) => (p, "minimal"),
                Err(e) => {
                    return Ok(Output::json(false, json!({ "ok": false, "method": "minimal", "error": e.to_string() })))
                }
            },
        },
    };
    let text = program.to_json_text();
    match output {
        None => Ok(Output { ok: true, body: Body::Text(text), table: None }),
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let summary = json!({
                "ok": true,
                "method": method,
                "states": program.states().len(),
                "edges": program.edges().len(),
                "output": path.display().to_string(),
            });
            Ok(Output::json(true, summary))
        }
    }
}

pub fn color(model: &Path, traces: &[impl AsRef<Path>], k: Option<usize>) -> Result<Output, CliError> {
    let m = input::model(model)?;
    let gts = input::traces(&m, traces)?;
    let xs = extended(&m, &gts).ok_or_else(|| CliError::Usage("coloring needs traces with operation names".into()))?;
    let g = trace_graph(&m, &xs);
    let found = match k {
        Some(k) => restricted_coloring(&g, k).map(|c| (k, c)),
        None => (1..=g.len().max(1)).find_map(|k| restricted_coloring(&g, k).map(|c| (k, c))),
    };
    let Some((k, c)) = found else {
        return Ok(Output::json(false, json!({ "ok": false, "k": k })));
    };
    let vertices: Vec<Json> = g
        .vertices
        .iter()
        .zip(&c.0)
        .map(|(v, col)| json!({ "trace": v.at.trace, "line": v.at.line, "op": v.op, "color": col }))
        .collect();
    Ok(Output::json(true, json!({ "ok": true, "k": k, "vertices": vertices })))
}

pub fn verify(model: &Path, program: &Path, traces: &[impl AsRef<Path>]) -> Result<Output, CliError> {
    let m = input::model(model)?;
    let p = input::program(program, Some(&m))?;
    let gts = input::traces(&m, traces)?;
    let report = verify_edge_predicates(&m, &p, &gts);
    let files = names(traces);
    let paths: Vec<Json> = gts
        .iter()
        .map(|g| match replay_structure(&m, &p, g) {
            Ok(path) => json!(path.states),
            Err(e) => json!({ "error": e }),
        })
        .collect();
    let mut table = String::new();
    for v in &report.violations {
        let _ = writeln!(
            table,
            "{} row {}: {} -> {}{}{}",
            files[v.at.trace],
            v.at.row,
            v.from,
            v.to.as_deref().unwrap_or("(end)"),
            if v.taken_false { ", taken edge is false" } else { "" },
            if v.siblings_true.is_empty() { String::new() } else { format!(", also true: {}", v.siblings_true.join(" ")) }
        );
    }
    for (t, e) in &report.failures {
        let _ = writeln!(table, "{}: {e}", files[*t]);
    }
    for w in &report.warnings {
        let _ = writeln!(table, "{}: ends in non-terminal state {}", files[w.trace], w.state);
    }
    let _ = writeln!(table, "{}", if report.ok() { "ok" } else { "FAILED" });
    let ok = report.ok();
    let body = json!({
        "ok": ok,
        "files": files,
        "paths": paths,
        "violations": report.violations,
        "failures": report.failures,
        "warnings": report.warnings,
    });
    Ok(Output::json(ok, body).with_table(table))
}

pub fn witnesses(model: &Path, program: &Path, traces: &[impl AsRef<Path>]) -> Result<Output, CliError> {
    let m = input::model(model)?;
    let p = input::program(program, Some(&m))?;
    let gts = input::traces(&m, traces)?;
    match edge_witnesses(&p, &gts) {
        Ok(r) => Ok(Output::json(true, json!({ "files": names(traces), "report": r }))),
        Err(e) => Ok(Output::json(false, json!({ "ok": false, "error": e.to_string() }))),
    }
}

pub fn missing(program: &Path, comments: Option<&Path>) -> Result<Output, CliError> {
    let p = input::program(program, None)?;
    let comments: BTreeMap<String, String> = match comments {
        Some(c) => serde_json::from_value(input::json(c)?)
            .map_err(|e| CliError::Load(c.display().to_string(), LoadError::Invalid(e.to_string())))?,
        None => BTreeMap::new(),
    };
    Ok(Output::json(true, missing_edges(&p, &comments)))
}

pub fn export(program: &Path, model: Option<&Path>, format: Format, dnf: bool) -> Result<Output, CliError> {
    let m = model.map(input::model).transpose()?;
    let p: Program = input::program(program, m.as_ref())?;
    let names: Vec<&str> = m.as_ref().map(|m| m.predicate_names()).unwrap_or_default();
    let predicates = if dnf { PredicateStyle::Dnf } else { PredicateStyle::Symbolic };
    let text = render(&p, RenderOptions { format, predicates }, &names);
    Ok(Output { ok: true, body: Body::Text(text), table: None })
}

pub fn fixtures_list() -> Result<Output, CliError> {
    let list: Vec<Json> = FIXTURE_NAMES
        .iter()
        .map(|n| {
            let f = fixture(n).expect("listed fixture exists");
            json!({ "name": n, "files": f.files().iter().map(|x| x.0).collect::<Vec<_>>() })
        })
        .collect();
    let table: String = FIXTURE_NAMES.iter().map(|n| format!("{n}\n")).collect();
    Ok(Output::json(true, list).with_table(table))
}

pub fn fixtures_export(name: &str, dir: &Path) -> Result<Output, CliError> {
    let f = fixture(name).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (file, text) in f.files() {
        let path = dir.join(file);
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        written.push(path.display().to_string());
    }
    Ok(Output::json(true, json!({ "fixture": name, "written": written })))
}
