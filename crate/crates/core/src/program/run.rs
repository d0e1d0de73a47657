//! Deterministic execution, determinism checking and equivalence on finite input sets.

use serde::Serialize;
use thiserror::Error;

use super::{EdgePredicate, Program};
use crate::model::{EvalError, MachineState, Model, Word};

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Terminated,
    FuelExhausted,
    /// More than one outgoing edge predicate holds.
    Ambiguous { state: String, word: Word, targets: Vec<String> },
    EvalError { state: String, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    /// Machine states; noop moves add nothing here.
    pub trace: Vec<MachineState>,
    /// Operation names, one per trace step.
    pub ops: Vec<String>,
    /// Every program state entered, including noop states.
    pub visited: Vec<String>,
    pub outcome: Outcome,
}

impl RunResult {
    pub fn terminated(&self) -> bool {
        self.outcome == Outcome::Terminated
    }

    /// The program state the run stopped in.
    pub fn last_state(&self) -> &str {
        self.visited.last().map(String::as_str).unwrap_or_default()
    }
}

/// Predicate values of one machine state, computed on demand.
pub(crate) struct LazyWord<'a> {
    model: &'a Model,
    state: &'a MachineState,
    cache: Vec<Option<Result<bool, EvalError>>>,
}

impl<'a> LazyWord<'a> {
    pub(crate) fn new(model: &'a Model, state: &'a MachineState) -> Self {
        LazyWord { model, state, cache: vec![None; model.predicates().len()] }
    }

    pub(crate) fn get(&mut self, name: &str) -> Result<bool, EvalError> {
        let i = self.model.predicate_index(name).ok_or_else(|| EvalError::Function {
            name: name.to_string(),
            message: "unknown predicate".into(),
        })?;
        self.bit(i)
    }

    fn bit(&mut self, i: usize) -> Result<bool, EvalError> {
        if self.cache[i].is_none() {
            self.cache[i] = Some(self.model.eval_predicate(i, self.state));
        }
        self.cache[i].clone().unwrap()
    }

    /// Full word, with `?` for predicates that cannot be evaluated.
    pub(crate) fn lenient(&mut self) -> Word {
        Word((0..self.cache.len()).map(|i| self.bit(i).ok()).collect())
    }
}

/// Truth value of an edge predicate at a machine state.
pub(crate) fn edge_holds(p: Option<&EdgePredicate>, word: &mut LazyWord) -> Result<bool, String> {
    match p {
        Some(EdgePredicate::Symbolic(f)) => f.eval(&mut |n| word.get(n)).map_err(|e| e.to_string()),
        Some(EdgePredicate::Words(ws)) => Ok(ws.contains(&word.lenient())),
        None => Err("edge has no predicate".to_string()),
    }
}

/// Indices of the outgoing edges of `at` whose predicate holds in `state`.
pub(crate) fn enabled_edges(
    model: &Model,
    program: &Program,
    at: usize,
    state: &MachineState,
) -> Result<Vec<usize>, String> {
    let mut word = LazyWord::new(model, state);
    let mut out = Vec::new();
    for &e in program.outgoing(at) {
        let edge = &program.edges()[e];
        let holds = edge_holds(edge.when.as_ref(), &mut word).map_err(|d| {
            format!("edge {} -> {}: {d}", program.name(edge.from), program.name(edge.to))
        })?;
        if holds {
            out.push(e);
        }
    }
    Ok(out)
}

/// Execute `program` from state `from` (default: start) on machine state `s`.
pub fn run(
    model: &Model,
    program: &Program,
    s: &MachineState,
    from: Option<&str>,
    fuel: u64,
) -> RunResult {
    let mut at = match from {
        None => program.start(),
        Some(name) => match program.index_of(name) {
            Some(i) => i,
            None => {
                return RunResult {
                    trace: vec![s.clone()],
                    ops: Vec::new(),
                    visited: Vec::new(),
                    outcome: Outcome::EvalError {
                        state: name.to_string(),
                        detail: "unknown program state".into(),
                    },
                }
            }
        },
    };
    let mut cur = s.clone();
    let mut res = RunResult {
        trace: vec![cur.clone()],
        ops: Vec::new(),
        visited: vec![program.name(at).to_string()],
        outcome: Outcome::Terminated,
    };
    let mut steps = 0u64;
    loop {
        let enabled = match enabled_edges(model, program, at, &cur) {
            Ok(v) => v,
            Err(detail) => {
                res.outcome = Outcome::EvalError { state: program.name(at).to_string(), detail };
                return res;
            }
        };
        let e = match enabled.as_slice() {
            [] => return res,
            [e] => *e,
            many => {
                res.outcome = Outcome::Ambiguous {
                    state: program.name(at).to_string(),
                    word: model.observe(&cur),
                    targets: many.iter().map(|&e| program.name(program.edges()[e].to).to_string()).collect(),
                };
                return res;
            }
        };
        if steps >= fuel {
            res.outcome = Outcome::FuelExhausted;
            return res;
        }
        steps += 1;
        at = program.edges()[e].to;
        let st = program.state(at);
        res.visited.push(st.name.clone());
        if st.noop {
            continue;
        }
        let op_name = st.op.as_deref().unwrap_or_default();
        match model.apply_named(&cur, op_name) {
            Ok(next) => cur = next,
            Err(err) => {
                res.outcome = Outcome::EvalError { state: st.name.clone(), detail: err.to_string() };
                return res;
            }
        }
        res.trace.push(cur.clone());
        res.ops.push(op_name.to_string());
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conflict {
    pub state: String,
    pub word: Word,
    pub targets: Vec<String>,
}

/// Every (state, word) pair with two or more enabled outgoing edges. Edges
/// whose value depends on a `?` bit of a word are not counted.
pub fn check_determinism(model: &Model, program: &Program, words: &[Word]) -> Vec<Conflict> {
    let mut out = Vec::new();
    for (i, st) in program.states().iter().enumerate() {
        let edges = program.outgoing(i);
        if edges.len() < 2 {
            continue;
        }
        for w in words {
            let mut targets = Vec::new();
            for &e in edges {
                let edge = &program.edges()[e];
                let holds = match &edge.when {
                    Some(EdgePredicate::Symbolic(f)) => f
                        .eval(&mut |n: &str| {
                            model.predicate_index(n).and_then(|k| w.bit(k)).ok_or(())
                        })
                        .unwrap_or(false),
                    Some(EdgePredicate::Words(ws)) => ws.contains(w),
                    None => false,
                };
                if holds {
                    targets.push(program.name(edge.to).to_string());
                }
            }
            if targets.len() > 1 {
                out.push(Conflict { state: st.name.clone(), word: w.clone(), targets });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("run on input #{input} stopped abnormally: {outcome:?}")]
pub struct RunError {
    pub input: usize,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub input: usize,
    pub left: Vec<MachineState>,
    pub right: Vec<MachineState>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    pub counterexample: Option<Counterexample>,
}

/// Compare the traces of two programs on every input. Operation sequences
/// are not compared. Ambiguous or failing runs are errors.
pub fn equivalent_on(
    model: &Model,
    p1: &Program,
    p2: &Program,
    inputs: &[MachineState],
    fuel: u64,
) -> Result<Equivalence, RunError> {
    for (i, s) in inputs.iter().enumerate() {
        let a = run(model, p1, s, None, fuel);
        let b = run(model, p2, s, None, fuel);
        for r in [&a, &b] {
            if matches!(r.outcome, Outcome::Ambiguous { .. } | Outcome::EvalError { .. }) {
                return Err(RunError { input: i, outcome: r.outcome.clone() });
            }
        }
        if a.trace != b.trace {
            return Ok(Equivalence {
                equivalent: false,
                counterexample: Some(Counterexample { input: i, left: a.trace, right: b.trace }),
            });
        }
    }
    Ok(Equivalence { equivalent: true, counterexample: None })
}
