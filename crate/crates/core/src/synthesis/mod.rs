//! Program synthesis from traces: consistency, unmergeable lines, the trace
//! graph and its restricted colorings.
//!
//! The fixed boundary of the U matrix is: last column and last row are 1
//! except the corner `(n+1, m+1)`, which is 0; row 0 and column 0 are 1
//! outside `(0, 0)`.

pub mod coloring;
pub mod consistency;
pub mod construct;
pub mod graph;
pub mod heuristic;
pub mod umatrix;

use thiserror::Error;

pub use coloring::{coloring_faults, restricted_coloring, Coloring, ColoringFault};
pub use consistency::{is_consistent, Consistency, ConsistencyFailure, FailureReason};
pub use construct::{
    k_consistent, minimal_program, program_from_coloring, reproduces, roundtrip_reconstruct,
    synthesize_k, RoundtripError, START,
};
pub use graph::{trace_graph, LineRef, TraceGraph, Vertex};
pub use heuristic::{heuristic_coloring, HeuristicReport};
pub use umatrix::{umatrix, unmergeable, UMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("not a restricted coloring ({} fault(s), first: {:?})", .0.len(), .0.first())]
    InvalidColoring(Vec<ColoringFault>),
    #[error("inconsistent traces: {0}")]
    Inconsistent(String),
}
