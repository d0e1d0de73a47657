//! Control-flow-graph programs over a model.

pub mod formula;
pub mod run;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{is_label_name, Model, ParseError, Word};

pub use formula::Formula;
pub use run::{
    check_determinism, equivalent_on, run, Conflict, Counterexample, Equivalence, Outcome,
    RunError, RunResult, DEFAULT_FUEL,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EdgePredicate {
    Symbolic(Formula),
    /// Accepts exactly the listed predicate words.
    Words(BTreeSet<Word>),
}

impl EdgePredicate {
    pub fn always() -> Self {
        EdgePredicate::Symbolic(Formula::True)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateDef {
    pub name: String,
    /// Operation label; `None` for the start state and for noop states.
    pub op: Option<String>,
    pub terminal: bool,
    pub noop: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// `None` for skeleton edges whose predicate has not been written yet.
    pub when: Option<EdgePredicate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("invalid state name `{0}`")]
    InvalidName(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("the start state `{0}` must not have incoming edges")]
    StartHasIncoming(String),
    #[error("the start state `{0}` must not carry an operation")]
    StartHasOperation(String),
    #[error("state `{0}` needs an operation label")]
    MissingOperation(String),
    #[error("terminal state `{0}` has outgoing edges")]
    TerminalHasEdges(String),
    #[error("state `{state}` uses operation `{op}`, which the model does not define")]
    UnknownOperation { state: String, op: String },
    #[error("noop state `{state}` uses non-empty operation `{op}`")]
    NoopNotEmpty { state: String, op: String },
    #[error("edge {from} -> {to} mentions unknown predicate `{pred}`")]
    UnknownPredicate { from: String, to: String, pred: String },
    #[error("edge {from} -> {to} has word `{word}` of length {len}, expected {expected}")]
    WordLength { from: String, to: String, word: String, len: usize, expected: usize },
    #[error("edge {from} -> {to}: {source}")]
    Formula { from: String, to: String, source: ParseError },
    #[error("edge {from} -> {to}: {message}")]
    BadEdge { from: String, to: String, message: String },
}

/// A program: states with operation labels, a start state and predicate-labelled edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    states: Vec<StateDef>,
    start: usize,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
}

impl Program {
    /// Build and check the structural invariants. `states` must contain the start state.
    pub fn new(states: Vec<StateDef>, start: &str, edges: Vec<Edge>) -> Result<Program, ProgramError> {
        let mut index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if !is_label_name(&s.name) {
                return Err(ProgramError::InvalidName(s.name.clone()));
            }
            if index.insert(s.name.clone(), i).is_some() {
                return Err(ProgramError::DuplicateState(s.name.clone()));
            }
        }
        let start = *index.get(start).ok_or_else(|| ProgramError::UnknownState(start.to_string()))?;
        let mut out = vec![Vec::new(); states.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.from >= states.len() || e.to >= states.len() {
                return Err(ProgramError::UnknownState(format!("#{}", e.from.max(e.to))));
            }
            if e.to == start {
                return Err(ProgramError::StartHasIncoming(states[start].name.clone()));
            }
            if states[e.from].terminal {
                return Err(ProgramError::TerminalHasEdges(states[e.from].name.clone()));
            }
            out[e.from].push(i);
        }
        let st = &states[start];
        if st.op.is_some() || st.noop {
            return Err(ProgramError::StartHasOperation(st.name.clone()));
        }
        for (i, s) in states.iter().enumerate() {
            if i != start && !s.noop && s.op.is_none() {
                return Err(ProgramError::MissingOperation(s.name.clone()));
            }
        }
        Ok(Program { states, start, edges, out, index })
    }

    pub fn builder(start: &str) -> ProgramBuilder {
        ProgramBuilder::new(start)
    }

    pub fn states(&self) -> &[StateDef] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &StateDef {
        &self.states[i]
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn start_name(&self) -> &str {
        &self.states[self.start].name
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Indices of the outgoing edges of state `i`, in declaration order.
    pub fn outgoing(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.states[i].name
    }

    /// Check operation labels and edge predicates against a model.
    pub fn validate(&self, model: &Model) -> Result<(), ProgramError> {
        for s in &self.states {
            if let Some(op) = &s.op {
                match model.operation(op) {
                    None => {
                        return Err(ProgramError::UnknownOperation {
                            state: s.name.clone(),
                            op: op.clone(),
                        })
                    }
                    Some(o) if s.noop && !o.is_empty() => {
                        return Err(ProgramError::NoopNotEmpty {
                            state: s.name.clone(),
                            op: op.clone(),
                        })
                    }
                    _ => {}
                }
            }
        }
        let k = model.predicates().len();
        for e in &self.edges {
            let (from, to) = (self.name(e.from).to_string(), self.name(e.to).to_string());
            match &e.when {
                Some(EdgePredicate::Symbolic(f)) => {
                    if let Some(p) = f.atoms().into_iter().find(|p| model.predicate_index(p).is_none()) {
                        return Err(ProgramError::UnknownPredicate { from, to, pred: p.to_string() });
                    }
                }
                Some(EdgePredicate::Words(ws)) => {
                    if let Some(w) = ws.iter().find(|w| w.len() != k) {
                        return Err(ProgramError::WordLength {
                            from,
                            to,
                            word: w.to_string(),
                            len: w.len(),
                            expected: k,
                        });
                    }
                }
                None => {}
            }
        }
        Ok(())
    }

    /// Replace the outgoing edges of `from` (keeping the position of the first one).
    pub fn with_edges_from(
        &self,
        from: &str,
        new_edges: Vec<(String, EdgePredicate)>,
    ) -> Result<Program, ProgramError> {
        let f = self.index_of(from).ok_or_else(|| ProgramError::UnknownState(from.to_string()))?;
        let mut fresh = Vec::new();
        for (to, p) in new_edges {
            let t = self.index_of(&to).ok_or(ProgramError::UnknownState(to))?;
            fresh.push(Edge { from: f, to: t, when: Some(p) });
        }
        let mut edges = Vec::new();
        let mut inserted = false;
        for e in &self.edges {
            if e.from == f {
                if !inserted {
                    edges.append(&mut fresh);
                    inserted = true;
                }
            } else {
                edges.push(e.clone());
            }
        }
        edges.append(&mut fresh);
        Program::new(self.states.clone(), self.start_name(), edges)
    }

    pub fn from_file(file: &ProgramFile) -> Result<Program, ProgramError> {
        let mut states: Vec<StateDef> = file
            .states
            .iter()
            .map(|s| StateDef {
                name: s.name.clone(),
                op: s.op.clone(),
                terminal: s.terminal,
                noop: s.noop,
            })
            .collect();
        if !states.iter().any(|s| s.name == file.start) {
            states.insert(
                0,
                StateDef { name: file.start.clone(), op: None, terminal: false, noop: false },
            );
        }
        let lookup = |n: &str| {
            states
                .iter()
                .position(|s| s.name == n)
                .ok_or_else(|| ProgramError::UnknownState(n.to_string()))
        };
        let mut edges = Vec::new();
        for e in &file.edges {
            let (from, to) = (lookup(&e.from)?, lookup(&e.to)?);
            let when = match (&e.when, &e.words) {
                (Some(_), Some(_)) => {
                    return Err(ProgramError::BadEdge {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        message: "give either `when` or `words`, not both".into(),
                    })
                }
                (Some(src), None) => Some(EdgePredicate::Symbolic(src.parse().map_err(|source| {
                    ProgramError::Formula { from: e.from.clone(), to: e.to.clone(), source }
                })?)),
                (None, Some(ws)) => Some(EdgePredicate::Words(
                    ws.iter()
                        .map(|w| w.parse::<Word>())
                        .collect::<Result<_, _>>()
                        .map_err(|message| ProgramError::BadEdge {
                            from: e.from.clone(),
                            to: e.to.clone(),
                            message,
                        })?,
                )),
                (None, None) => None,
            };
            edges.push(Edge { from, to, when });
        }
        Program::new(states, &file.start, edges)
    }

    pub fn to_file(&self) -> ProgramFile {
        ProgramFile {
            start: self.start_name().to_string(),
            states: self
                .states
                .iter()
                .map(|s| StateDecl {
                    name: s.name.clone(),
                    op: s.op.clone(),
                    terminal: s.terminal,
                    noop: s.noop,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| {
                    let (when, words) = match &e.when {
                        Some(EdgePredicate::Symbolic(f)) => (Some(f.to_string()), None),
                        Some(EdgePredicate::Words(ws)) => {
                            (None, Some(ws.iter().map(|w| w.to_string()).collect()))
                        }
                        None => (None, None),
                    };
                    EdgeDecl { from: self.name(e.from).to_string(), to: self.name(e.to).to_string(), when, words }
                })
                .collect(),
        }
    }

    pub fn from_json_str(src: &str) -> Result<Program, crate::io::LoadError> {
        let file: ProgramFile = crate::io::parse_json(src)?;
        Ok(Program::from_file(&file)?)
    }

    pub fn to_json_text(&self) -> String {
        crate::io::to_json_text(&self.to_file())
    }

    /// Program states reachable from the start along any edge.
    pub fn reachable(&self) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([self.start]);
        let mut stack = vec![self.start];
        while let Some(u) = stack.pop() {
            for &e in &self.out[u] {
                let v = self.edges[e].to;
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub terminal: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub noop: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDecl {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<String>>,
}

/// On-disk program description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramFile {
    pub start: String,
    pub states: Vec<StateDecl>,
    #[serde(default)]
    pub edges: Vec<EdgeDecl>,
}

/// Programmatic construction with string state names.
pub struct ProgramBuilder {
    start: String,
    states: Vec<StateDef>,
    edges: Vec<(String, String, Result<Option<EdgePredicate>, ParseError>)>,
}

impl ProgramBuilder {
    pub fn new(start: &str) -> Self {
        ProgramBuilder {
            start: start.to_string(),
            states: vec![StateDef { name: start.to_string(), op: None, terminal: false, noop: false }],
            edges: Vec::new(),
        }
    }

    pub fn state(mut self, name: &str, op: &str) -> Self {
        self.states.push(StateDef { name: name.into(), op: Some(op.into()), terminal: false, noop: false });
        self
    }

    pub fn terminal(mut self, name: &str, op: &str) -> Self {
        self.states.push(StateDef { name: name.into(), op: Some(op.into()), terminal: true, noop: false });
        self
    }

    pub fn noop(mut self, name: &str) -> Self {
        self.states.push(StateDef { name: name.into(), op: None, terminal: false, noop: true });
        self
    }

    /// Edge with a symbolic formula.
    pub fn edge(mut self, from: &str, to: &str, when: &str) -> Self {
        let p = when.parse().map(|f| Some(EdgePredicate::Symbolic(f)));
        self.edges.push((from.into(), to.into(), p));
        self
    }

    pub fn edge_with(mut self, from: &str, to: &str, when: Option<EdgePredicate>) -> Self {
        self.edges.push((from.into(), to.into(), Ok(when)));
        self
    }

    pub fn build(self) -> Result<Program, ProgramError> {
        let names: HashMap<&str, usize> =
            self.states.iter().enumerate().map(|(i, s)| (s.name.as_str(), i)).collect();
        let mut edges = Vec::new();
        for (from, to, when) in &self.edges {
            let idx = |n: &String| names.get(n.as_str()).copied().ok_or_else(|| ProgramError::UnknownState(n.clone()));
            let when = when.clone().map_err(|source| ProgramError::Formula {
                from: from.clone(),
                to: to.clone(),
                source,
            })?;
            edges.push(Edge { from: idx(from)?, to: idx(to)?, when });
        }
        Program::new(self.states, &self.start, edges)
    }
}
