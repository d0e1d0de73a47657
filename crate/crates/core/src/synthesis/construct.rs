use std::collections::{BTreeMap, BTreeSet};

use super::coloring::{coloring_faults, restricted_coloring, Coloring};
use super::graph::{trace_graph, TraceGraph};
use super::SynthesisError;
use crate::model::{MachineState, Model, Word};
use crate::program::{equivalent_on, run, Edge, EdgePredicate, Outcome, Program, RunError, StateDef};
use crate::trace::ExtendedTrace;

/// Name of the start state of synthesized programs.
pub const START: &str = "Start";

/// The program of a valid restricted coloring: one state per color, edges
/// labelled with the predicate words of the lines they leave from.
pub fn program_from_coloring(
    model: &Model,
    traces: &[ExtendedTrace],
    c: &Coloring,
) -> Result<Program, SynthesisError> {
    let g = trace_graph(model, traces);
    build(&g, c)
}

pub(crate) fn build(g: &TraceGraph, c: &Coloring) -> Result<Program, SynthesisError> {
    let faults = coloring_faults(g, c);
    if !faults.is_empty() {
        return Err(SynthesisError::InvalidColoring(faults));
    }
    if g.is_empty() {
        return Ok(Program::new(vec![start_def()], START, Vec::new()).expect("start-only program"));
    }
    let start_color = c.0[g.start_vertices()[0]];
    let mut ops: BTreeMap<usize, String> = BTreeMap::new();
    for (v, vx) in g.vertices.iter().enumerate() {
        if let Some(op) = &vx.op {
            ops.insert(c.0[v], op.clone());
        }
    }
    let mut per_op: BTreeMap<&str, usize> = BTreeMap::new();
    for op in ops.values() {
        *per_op.entry(op.as_str()).or_default() += 1;
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut index = BTreeMap::from([(start_color, 0usize)]);
    let mut states = vec![start_def()];
    for (&color, op) in &ops {
        let n = seen.entry(op.as_str()).or_default();
        *n += 1;
        let name = if per_op[op.as_str()] == 1 && op != START { op.clone() } else { format!("{op}#{n}") };
        index.insert(color, states.len());
        states.push(StateDef { name, op: Some(op.clone()), terminal: false, noop: false });
    }
    let mut words: BTreeMap<(usize, usize), BTreeSet<Word>> = BTreeMap::new();
    for (v, vx) in g.vertices.iter().enumerate() {
        if let Some(s) = vx.succ {
            words.entry((index[&c.0[v]], index[&c.0[s]])).or_default().insert(vx.word.clone());
        }
    }
    let edges = words
        .into_iter()
        .map(|((from, to), ws)| Edge { from, to, when: Some(EdgePredicate::Words(ws)) })
        .collect();
    Program::new(states, START, edges).map_err(|e| SynthesisError::Inconsistent(e.to_string()))
}

fn start_def() -> StateDef {
    StateDef { name: START.to_string(), op: None, terminal: false, noop: false }
}

/// Whether `p` produces exactly the states and operations of every trace.
pub fn reproduces(model: &Model, p: &Program, traces: &[ExtendedTrace]) -> bool {
    traces.iter().all(|t| {
        let r = run(model, p, &t.states[0], None, t.len() as u64);
        r.outcome == Outcome::Terminated && r.trace == t.states && r.ops == t.ops
    })
}

/// A program with at most `k` states that produces every trace, if one exists.
pub fn synthesize_k(model: &Model, traces: &[ExtendedTrace], k: usize) -> Option<Program> {
    let g = trace_graph(model, traces);
    let c = restricted_coloring(&g, k)?;
    let p = build(&g, &c).ok()?;
    reproduces(model, &p, traces).then_some(p)
}

pub fn k_consistent(model: &Model, traces: &[ExtendedTrace], k: usize) -> bool {
    synthesize_k(model, traces, k).is_some()
}

/// Smallest number of colors, together with its program.
pub fn minimal_program(model: &Model, traces: &[ExtendedTrace]) -> Result<(Program, usize), SynthesisError> {
    let g = trace_graph(model, traces);
    if g.is_empty() {
        return Ok((build(&g, &Coloring(Vec::new()))?, 1));
    }
    if restricted_coloring(&g, g.len()).is_none() {
        return Err(SynthesisError::Inconsistent(
            "traces with indistinguishable first states behave differently".into(),
        ));
    }
    for k in 1 + g.distinct_ops()..=g.len() {
        if let Some(c) = restricted_coloring(&g, k) {
            let p = build(&g, &c)?;
            if !reproduces(model, &p, traces) {
                return Err(SynthesisError::Inconsistent("constructed program does not reproduce the traces".into()));
            }
            return Ok((p, k));
        }
    }
    Err(SynthesisError::Inconsistent(format!("no restricted coloring with at most {} colors", g.len())))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundtripError {
    Run(RunError),
    Synthesis(SynthesisError),
}

impl std::fmt::Display for RoundtripError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RoundtripError::Run(e) => e.fmt(f),
            RoundtripError::Synthesis(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for RoundtripError {}

/// Record traces of `p` on `inputs`, synthesize a minimal program from them
/// and compare both programs on the same inputs.
pub fn roundtrip_reconstruct(
    model: &Model,
    p: &Program,
    inputs: &[MachineState],
    fuel: u64,
) -> Result<bool, RoundtripError> {
    let mut traces = Vec::with_capacity(inputs.len());
    for (i, s) in inputs.iter().enumerate() {
        let r = run(model, p, s, None, fuel);
        if !r.terminated() {
            return Err(RoundtripError::Run(RunError { input: i, outcome: r.outcome }));
        }
        traces.push(ExtendedTrace::new(r.trace, r.ops));
    }
    let (q, _) = minimal_program(model, &traces).map_err(RoundtripError::Synthesis)?;
    let eq = equivalent_on(model, p, &q, inputs, fuel).map_err(RoundtripError::Run)?;
    Ok(eq.equivalent)
}
