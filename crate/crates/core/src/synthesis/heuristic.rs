//! The "same operation, same color" heuristic and its conflicts.

use serde::Serialize;

use super::coloring::{coloring_faults, Coloring, ColoringFault};
use super::graph::{trace_graph, LineRef};
use crate::model::Model;
use crate::trace::ExtendedTrace;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeuristicReport {
    pub coloring: Coloring,
    /// Color names: the start color first, then operations by first occurrence.
    pub colors: Vec<String>,
    /// Same-colored lines that are unmergeable.
    pub adjacent: Vec<(LineRef, LineRef)>,
    /// Same-colored indistinguishable lines whose successors differ in color
    /// (or only one of which is a last line).
    pub restriction: Vec<(LineRef, LineRef)>,
}

impl HeuristicReport {
    pub fn ok(&self) -> bool {
        self.adjacent.is_empty() && self.restriction.is_empty()
    }
}

pub fn heuristic_coloring(model: &Model, traces: &[ExtendedTrace]) -> HeuristicReport {
    let g = trace_graph(model, traces);
    let mut colors = vec![super::construct::START.to_string()];
    let mut c = Vec::with_capacity(g.len());
    for v in &g.vertices {
        let color = match &v.op {
            None => 0,
            Some(op) => match colors[1..].iter().position(|x| x == op) {
                Some(i) => i + 1,
                None => {
                    colors.push(op.clone());
                    colors.len() - 1
                }
            },
        };
        c.push(color);
    }
    let coloring = Coloring(c);
    let (mut adjacent, mut restriction) = (Vec::new(), Vec::new());
    for f in coloring_faults(&g, &coloring) {
        match f {
            ColoringFault::Adjacent { a, b } => adjacent.push((g.vertices[a].at, g.vertices[b].at)),
            ColoringFault::Restriction { a, b } => restriction.push((g.vertices[a].at, g.vertices[b].at)),
            ColoringFault::StartColors { .. } | ColoringFault::WrongLength { .. } => {}
        }
    }
    HeuristicReport { coloring, colors, adjacent, restriction }
}
