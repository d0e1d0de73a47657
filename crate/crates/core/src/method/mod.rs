//! Tool support for building a program by hand from example traces:
//! checking generalized cells, collecting operations, the control-flow
//! skeleton, edge witnesses, replay and edge-predicate checks, and decision
//! trees for states with many successors.

pub mod cfg;
pub mod decision_tree;
pub mod generalize;
pub mod operations;
pub mod replay;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Model, Word};
use crate::program::ProgramError;
use crate::trace::GeneralizedTrace;

pub use cfg::{edge_witnesses, missing_edges, synthesize_cfg, EdgeWitness, EdgeWitnessReport, MissingEdge, Transition};
pub use decision_tree::{expand_decision_tree, DecisionTree};
pub use generalize::{verify_generalization, CellCheck, GeneralizationReport};
pub use operations::{collect_operations, NamingConflict, OperationTable};
pub use replay::{
    replay, replay_structure, verify_edge_predicates, EndWarning, PredicateReport, ReplayError, ReplayPath, Step,
    Violation,
};

/// Row `row` (1-based) of trace `trace` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RowRef {
    pub trace: usize,
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MethodError {
    #[error("trace {}, row {} has no operation name", .0.trace, .0.row)]
    UnnamedRow(RowRef),
    #[error("no program state carries operation `{0}`")]
    UnknownOperationName(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("predicate `{0}` repeats on a path of the decision tree")]
    RepeatedPredicate(String),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

/// Distinct predicate words (leniently observed) of all states of the traces, sorted.
pub fn trace_words(model: &Model, gts: &[GeneralizedTrace]) -> Vec<Word> {
    let mut out: Vec<Word> = gts.iter().flat_map(|g| g.states(model)).map(|s| model.observe(&s)).collect();
    out.sort();
    out.dedup();
    out
}
