//! Traces, extended traces, lines and generalized traces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};
use thiserror::Error;

use crate::io::LoadError;
use crate::model::{Expr, MachineState, Model, Value};
use crate::program::{Program, RunResult};

/// A trace annotated with the operation taken at each step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtendedTrace {
    pub states: Vec<MachineState>,
    pub ops: Vec<String>,
}

impl ExtendedTrace {
    pub fn new(states: Vec<MachineState>, ops: Vec<String>) -> Self {
        assert_eq!(states.len(), ops.len() + 1, "an extended trace has one more state than operations");
        ExtendedTrace { states, ops }
    }

    /// Number of operations.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn lines(&self) -> Vec<Line<'_>> {
        lines_of(self)
    }

    pub fn from_run(r: &RunResult) -> Self {
        ExtendedTrace::new(r.trace.clone(), r.ops.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Line<'a> {
    pub index: usize,
    pub state: &'a MachineState,
    /// `None` for line 0.
    pub op: Option<&'a str>,
}

pub fn lines_of(xt: &ExtendedTrace) -> Vec<Line<'_>> {
    xt.states
        .iter()
        .enumerate()
        .map(|(i, s)| Line { index: i, state: s, op: if i == 0 { None } else { Some(xt.ops[i - 1].as_str()) } })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceCheck {
    pub valid: bool,
    /// For each step (1-based position `i` = transition into state `i`), the
    /// operations that map the previous state to the next.
    pub witnesses: Vec<Vec<String>>,
    /// First step without a witnessing operation.
    pub failed_step: Option<usize>,
}

/// Check that consecutive states are connected by some operation.
pub fn validate_trace(model: &Model, states: &[MachineState]) -> TraceCheck {
    let witnesses: Vec<Vec<String>> = states
        .windows(2)
        .map(|w| {
            model
                .operations()
                .iter()
                .filter(|op| model.apply(&w[0], op).map_or(false, |t| t == w[1]))
                .map(|op| op.name.clone())
                .collect()
        })
        .collect();
    let failed_step = witnesses.iter().position(Vec::is_empty).map(|i| i + 1);
    TraceCheck { valid: failed_step.is_none(), witnesses, failed_step }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtendedCheck {
    pub valid: bool,
    pub failed_step: Option<usize>,
    pub detail: Option<String>,
}

/// Check that every named operation reproduces the next state.
pub fn validate_extended(model: &Model, xt: &ExtendedTrace) -> ExtendedCheck {
    for (i, op) in xt.ops.iter().enumerate() {
        let detail = match model.apply_named(&xt.states[i], op) {
            Ok(t) if t == xt.states[i + 1] => continue,
            Ok(t) => format!("{op} gives {}, trace has {}", model.show(&t), model.show(&xt.states[i + 1])),
            Err(e) => format!("{op}: {e}"),
        };
        return ExtendedCheck { valid: false, failed_step: Some(i + 1), detail: Some(detail) };
    }
    ExtendedCheck { valid: true, failed_step: None, detail: None }
}

/// Partition trace indices by the (leniently observed) predicate word of
/// their first state. Classes are ordered by first occurrence.
pub fn quotient_sim0(model: &Model, traces: &[Vec<MachineState>]) -> Vec<Vec<usize>> {
    let mut classes: Vec<(crate::model::Word, Vec<usize>)> = Vec::new();
    for (i, t) in traces.iter().enumerate() {
        let w = model.observe(&t[0]);
        match classes.iter_mut().find(|(v, _)| *v == w) {
            Some((_, c)) => c.push(i),
            None => classes.push((w, vec![i])),
        }
    }
    classes.into_iter().map(|(_, c)| c).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("trace is too short to drop its first state")]
    TooShort,
}

/// Drop the first state.
pub fn tail(states: &[MachineState]) -> Result<Vec<MachineState>, TraceError> {
    if states.len() < 2 {
        return Err(TraceError::TooShort);
    }
    Ok(states[1..].to_vec())
}

/// One row of a generalized trace.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Row {
    pub op: Option<String>,
    /// Assigned cells; blank cells are absent.
    pub values: BTreeMap<String, Value>,
    /// Generalizing expressions, evaluated against the previous row's state.
    pub exprs: BTreeMap<String, Expr>,
}

/// A trace table: input row plus rows of assigned cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedTrace {
    pub input: MachineState,
    pub rows: Vec<Row>,
}

impl GeneralizedTrace {
    /// Accumulated machine states: the input, then the state after each row.
    pub fn states(&self, model: &Model) -> Vec<MachineState> {
        let mut out = Vec::with_capacity(self.rows.len() + 1);
        let mut cur = self.input.clone();
        out.push(cur.clone());
        for r in &self.rows {
            for (var, v) in &r.values {
                if let Some(i) = model.var_index(var) {
                    cur.values[i] = v.clone();
                }
            }
            out.push(cur.clone());
        }
        out
    }

    /// The extended trace, if every row names its operation.
    pub fn to_extended(&self, model: &Model) -> Option<ExtendedTrace> {
        let ops = self.rows.iter().map(|r| r.op.clone()).collect::<Option<Vec<_>>>()?;
        Some(ExtendedTrace::new(self.states(model), ops))
    }

    pub fn all_named(&self) -> bool {
        self.rows.iter().all(|r| r.op.is_some())
    }

    /// Drop expressions and operation names.
    pub fn strip(&self, model: &Model) -> Vec<MachineState> {
        self.states(model)
    }

    /// Rows from an execution: each row holds the operation and the cells it assigned.
    pub fn from_run(model: &Model, r: &RunResult) -> GeneralizedTrace {
        let rows = r
            .ops
            .iter()
            .zip(&r.trace[1..])
            .map(|(op, s)| {
                let targets = model.operation(op).map(|o| o.assignments.keys().cloned().collect::<Vec<_>>());
                let values = targets
                    .unwrap_or_default()
                    .into_iter()
                    .map(|v| {
                        let x = model.get(s, &v).cloned().unwrap_or(Value::Undefined);
                        (v, x)
                    })
                    .collect();
                Row { op: Some(op.clone()), values, exprs: BTreeMap::new() }
            })
            .collect();
        GeneralizedTrace { input: r.trace[0].clone(), rows }
    }

    /// Convenience: run `program` on `input` and record the rows.
    pub fn record(model: &Model, program: &Program, input: &MachineState, fuel: u64) -> (GeneralizedTrace, RunResult) {
        let r = crate::program::run(model, program, input, None, fuel);
        (GeneralizedTrace::from_run(model, &r), r)
    }

    pub fn from_file(model: &Model, file: &TraceFile) -> Result<GeneralizedTrace, LoadError> {
        let input = model
            .state_from_json(&Json::Object(file.input.clone()))
            .map_err(|e| LoadError::Invalid(format!("input row: {e}")))?;
        let mut rows = Vec::with_capacity(file.rows.len());
        for (n, r) in file.rows.iter().enumerate() {
            let at = |msg: String| LoadError::Invalid(format!("row {}: {msg}", n + 1));
            let mut values = BTreeMap::new();
            for (var, j) in &r.values {
                let i = model.var_index(var).ok_or_else(|| at(format!("unknown variable `{var}`")))?;
                let v = Value::from_json(&model.variables()[i].ty, j)
                    .map_err(|e| at(format!("variable `{var}`: {e}")))?;
                if !v.is_undefined() {
                    values.insert(var.clone(), v);
                }
            }
            let mut exprs = BTreeMap::new();
            for (var, src) in &r.exprs {
                if model.var_index(var).is_none() {
                    return Err(at(format!("unknown variable `{var}`")));
                }
                let e: Expr = src.parse().map_err(|e| at(format!("expression for `{var}`: {e}")))?;
                exprs.insert(var.clone(), e);
            }
            rows.push(Row { op: r.op.clone(), values, exprs });
        }
        Ok(GeneralizedTrace { input, rows })
    }

    pub fn to_file(&self, model: &Model) -> TraceFile {
        let mut input = Map::new();
        for (v, x) in model.variables().iter().zip(&self.input.values) {
            if !x.is_undefined() {
                input.insert(v.name.clone(), x.to_json());
            }
        }
        TraceFile {
            input,
            rows: self
                .rows
                .iter()
                .map(|r| RowDecl {
                    op: r.op.clone(),
                    values: r.values.iter().map(|(k, v)| (k.clone(), v.to_json())).collect(),
                    exprs: r.exprs.iter().map(|(k, e)| (k.clone(), e.to_string())).collect(),
                })
                .collect(),
        }
    }

    pub fn from_json_str(model: &Model, src: &str) -> Result<GeneralizedTrace, LoadError> {
        let file: TraceFile = crate::io::parse_json(src)?;
        GeneralizedTrace::from_file(model, &file)
    }

    pub fn to_json_text(&self, model: &Model) -> String {
        crate::io::to_json_text(&self.to_file(model))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[serde(default)]
    pub values: BTreeMap<String, Json>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub exprs: BTreeMap<String, String>,
}

/// On-disk trace table. `null` cells are blank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    #[serde(default)]
    pub input: Map<String, Json>,
    #[serde(default)]
    pub rows: Vec<RowDecl>,
}
