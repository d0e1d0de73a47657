//! The recursive consistency criterion for plain traces and its tree-shaped witness.

use std::collections::BTreeSet;

use serde::Serialize;

use super::construct::START;
use crate::model::{MachineState, Model};
use crate::program::{Edge, EdgePredicate, Program, StateDef};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// The class mixes one-state traces with longer ones.
    MixedLengths,
    /// No single operation maps every first state to its successor.
    NoCommonOperation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyFailure {
    /// Number of leading states already dropped.
    pub depth: usize,
    /// Indices of the input traces in the failing class.
    pub class: Vec<usize>,
    pub reason: FailureReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Consistency {
    pub witness: Option<Program>,
    pub failure: Option<ConsistencyFailure>,
}

impl Consistency {
    pub fn consistent(&self) -> bool {
        self.witness.is_some()
    }
}

struct Builder<'a> {
    model: &'a Model,
    states: Vec<StateDef>,
    edges: Vec<Edge>,
}

impl Builder<'_> {
    /// Add the subtree for `members` (trace indices, each at offset `depth`)
    /// below program state `at`.
    fn grow(
        &mut self,
        traces: &[Vec<MachineState>],
        members: &[usize],
        depth: usize,
        at: usize,
    ) -> Result<(), ConsistencyFailure> {
        let mut classes: Vec<(crate::model::Word, Vec<usize>)> = Vec::new();
        for &i in members {
            let w = self.model.observe(&traces[i][depth]);
            match classes.iter_mut().find(|(v, _)| *v == w) {
                Some((_, c)) => c.push(i),
                None => classes.push((w, vec![i])),
            }
        }
        for (word, class) in classes {
            let longer = class.iter().filter(|&&i| traces[i].len() > depth + 1).count();
            if longer == 0 {
                continue;
            }
            if longer < class.len() {
                return Err(ConsistencyFailure { depth, class, reason: FailureReason::MixedLengths });
            }
            let op = self
                .model
                .operations()
                .iter()
                .find(|op| {
                    class.iter().all(|&i| {
                        self.model.apply(&traces[i][depth], op).map_or(false, |t| t == traces[i][depth + 1])
                    })
                })
                .ok_or_else(|| ConsistencyFailure {
                    depth,
                    class: class.clone(),
                    reason: FailureReason::NoCommonOperation,
                })?;
            let v = self.states.len();
            self.states.push(StateDef {
                name: format!("v{v}"),
                op: Some(op.name.clone()),
                terminal: false,
                noop: false,
            });
            self.edges.push(Edge { from: at, to: v, when: Some(EdgePredicate::Words(BTreeSet::from([word]))) });
            self.grow(traces, &class, depth + 1, v)?;
        }
        Ok(())
    }
}

/// Decide consistency of a set of traces. On success the witness is a
/// tree-shaped program whose edges accept exactly one predicate word each.
pub fn is_consistent(model: &Model, traces: &[Vec<MachineState>]) -> Consistency {
    let mut b = Builder {
        model,
        states: vec![StateDef { name: START.into(), op: None, terminal: false, noop: false }],
        edges: Vec::new(),
    };
    let all: Vec<usize> = (0..traces.len()).filter(|&i| !traces[i].is_empty()).collect();
    match b.grow(traces, &all, 0, 0) {
        Ok(()) => Consistency {
            witness: Some(Program::new(b.states, START, b.edges).expect("tree witness is well formed")),
            failure: None,
        },
        Err(f) => Consistency { witness: None, failure: Some(f) },
    }
}
