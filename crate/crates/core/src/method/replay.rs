use serde::Serialize;
use thiserror::Error;

use super::RowRef;
use crate::model::{MachineState, Model};
use crate::program::run::{edge_holds, LazyWord};
use crate::program::Program;
use crate::trace::GeneralizedTrace;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    /// 1-based row the step enters.
    pub row: usize,
    /// Edge indices taken, through any noop states.
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayPath {
    /// Program states in order, starting with the start state.
    pub states: Vec<String>,
    pub steps: Vec<Step>,
    /// Whether the last state is terminal.
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReplayError {
    #[error("row {row} has no operation name")]
    UnnamedRow { row: usize },
    #[error("row {row}: no path from {from} to an `{op}` state")]
    StructuralMismatch { row: usize, from: String, op: String },
    #[error("row {row}: several paths from {from} apply: {targets:?}")]
    AmbiguousEdge { row: usize, from: String, targets: Vec<String> },
    #[error("row {row}: predicate of {from} -> {to} does not hold")]
    PredicateMismatch { row: usize, from: String, to: String },
    #[error("row {row}: noop states form a cycle at {state}")]
    NoopCycle { row: usize, state: String },
}

fn holds(model: &Model, p: &Program, e: usize, s: &MachineState) -> Result<bool, String> {
    edge_holds(p.edges()[e].when.as_ref(), &mut LazyWord::new(model, s))
}

/// Paths of edges from `from` to an `op` state through noop states, and
/// whether a noop cycle was met on the way.
fn paths(p: &Program, from: usize, op: &str) -> (Vec<Vec<usize>>, Option<usize>) {
    fn walk(
        p: &Program,
        at: usize,
        op: &str,
        path: &mut Vec<usize>,
        seen: &mut Vec<usize>,
        out: &mut (Vec<Vec<usize>>, Option<usize>),
    ) {
        for &e in p.outgoing(at) {
            let to = p.edges()[e].to;
            let st = p.state(to);
            path.push(e);
            if st.noop {
                if seen.contains(&to) {
                    out.1.get_or_insert(to);
                } else {
                    seen.push(to);
                    walk(p, to, op, path, seen, out);
                    seen.pop();
                }
            } else if st.op.as_deref() == Some(op) {
                out.0.push(path.clone());
            }
            path.pop();
        }
    }
    let mut out = (Vec::new(), None);
    walk(p, from, op, &mut Vec::new(), &mut vec![from], &mut out);
    out
}

/// Walk the program along the rows. When several paths fit a row, edge
/// predicates choose; with `check` set, the predicates of the chosen path must hold.
fn walk(model: &Model, program: &Program, gt: &GeneralizedTrace, check: bool) -> Result<ReplayPath, ReplayError> {
    let states = gt.states(model);
    let mut at = program.start();
    let mut out = ReplayPath { states: vec![program.start_name().to_string()], steps: Vec::new(), terminal: false };
    for (r, row) in gt.rows.iter().enumerate() {
        let s = &states[r];
        let op = row.op.as_deref().ok_or(ReplayError::UnnamedRow { row: r + 1 })?;
        let (mut found, cycle) = paths(program, at, op);
        if found.is_empty() {
            return Err(match cycle {
                Some(c) => ReplayError::NoopCycle { row: r + 1, state: program.name(c).to_string() },
                None => ReplayError::StructuralMismatch { row: r + 1, from: program.name(at).to_string(), op: op.into() },
            });
        }
        if found.len() > 1 {
            let targets: Vec<String> =
                found.iter().map(|p| program.name(program.edges()[*p.last().unwrap()].to).to_string()).collect();
            found.retain(|path| path.iter().all(|&e| holds(model, program, e, s) == Ok(true)));
            if found.len() != 1 {
                return Err(ReplayError::AmbiguousEdge { row: r + 1, from: program.name(at).to_string(), targets });
            }
        }
        let path = found.pop().unwrap();
        if check {
            if let Some(&bad) = path.iter().find(|&&e| holds(model, program, e, s) != Ok(true)) {
                let e = &program.edges()[bad];
                return Err(ReplayError::PredicateMismatch {
                    row: r + 1,
                    from: program.name(e.from).to_string(),
                    to: program.name(e.to).to_string(),
                });
            }
        }
        for &e in &path {
            out.states.push(program.name(program.edges()[e].to).to_string());
        }
        at = program.edges()[*path.last().unwrap()].to;
        out.steps.push(Step { row: r + 1, edges: path });
    }
    out.terminal = program.state(at).terminal;
    Ok(out)
}

/// Replay a named trace through the program; noop states consume no row.
pub fn replay(model: &Model, program: &Program, gt: &GeneralizedTrace) -> Result<ReplayPath, ReplayError> {
    walk(model, program, gt, true)
}

/// Replay using the program structure only (predicates break ties).
pub fn replay_structure(model: &Model, program: &Program, gt: &GeneralizedTrace) -> Result<ReplayPath, ReplayError> {
    walk(model, program, gt, false)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub at: RowRef,
    pub from: String,
    /// Target of the taken edge; `None` after the last row.
    pub to: Option<String>,
    /// The taken edge's predicate is false (or could not be evaluated).
    pub taken_false: bool,
    /// Targets of other outgoing edges whose predicates hold.
    pub siblings_true: Vec<String>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndWarning {
    pub trace: usize,
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct PredicateReport {
    pub violations: Vec<Violation>,
    /// Traces ending in a non-terminal state.
    pub warnings: Vec<EndWarning>,
    pub failures: Vec<(usize, ReplayError)>,
}

impl PredicateReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.failures.is_empty()
    }
}

/// For every replayed step, the taken edge must hold and its siblings must
/// not; after the last row no outgoing edge may hold.
pub fn verify_edge_predicates(model: &Model, program: &Program, gts: &[GeneralizedTrace]) -> PredicateReport {
    let mut report = PredicateReport::default();
    for (t, gt) in gts.iter().enumerate() {
        let path = match replay_structure(model, program, gt) {
            Ok(p) => p,
            Err(e) => {
                report.failures.push((t, e));
                continue;
            }
        };
        let states = gt.states(model);
        let mut at = program.start();
        for step in &path.steps {
            let s = &states[step.row - 1];
            for &e in &step.edges {
                let edge = &program.edges()[e];
                let mut errors = Vec::new();
                let taken_false = match holds(model, program, e, s) {
                    Ok(v) => !v,
                    Err(d) => {
                        errors.push(d);
                        true
                    }
                };
                let mut siblings_true = Vec::new();
                for &o in program.outgoing(edge.from) {
                    if o == e {
                        continue;
                    }
                    match holds(model, program, o, s) {
                        Ok(true) => siblings_true.push(program.name(program.edges()[o].to).to_string()),
                        Ok(false) => {}
                        Err(d) => errors.push(d),
                    }
                }
                if taken_false || !siblings_true.is_empty() || !errors.is_empty() {
                    report.violations.push(Violation {
                        at: RowRef { trace: t, row: step.row },
                        from: program.name(edge.from).to_string(),
                        to: Some(program.name(edge.to).to_string()),
                        taken_false,
                        siblings_true,
                        errors,
                    });
                }
                at = edge.to;
            }
        }
        let last = &states[gt.rows.len()];
        let mut siblings_true = Vec::new();
        let mut errors = Vec::new();
        for &o in program.outgoing(at) {
            match holds(model, program, o, last) {
                Ok(true) => siblings_true.push(program.name(program.edges()[o].to).to_string()),
                Ok(false) => {}
                Err(d) => errors.push(d),
            }
        }
        if !siblings_true.is_empty() || !errors.is_empty() {
            report.violations.push(Violation {
                at: RowRef { trace: t, row: gt.rows.len() },
                from: program.name(at).to_string(),
                to: None,
                taken_false: false,
                siblings_true,
                errors,
            });
        }
        if !path.terminal {
            report.warnings.push(EndWarning { trace: t, state: program.name(at).to_string() });
        }
    }
    report
}
