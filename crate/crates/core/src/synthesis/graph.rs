use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::umatrix::{compute, Interner, LineKeys};
use crate::model::{Model, Word};
use crate::trace::ExtendedTrace;

/// Identifies line `line` of trace `trace`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LineRef {
    pub trace: usize,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub at: LineRef,
    pub op: Option<String>,
    pub word: Word,
    /// The next line of the same trace, if any.
    pub succ: Option<usize>,
}

/// Vertices are all lines of all traces; edges join unmergeable lines.
#[derive(Debug, Clone)]
pub struct TraceGraph {
    pub vertices: Vec<Vertex>,
    adj: Vec<FixedBitSet>,
    /// Index of the first vertex of each trace.
    offsets: Vec<usize>,
    pub(crate) word_ids: Vec<usize>,
    pub(crate) op_ids: Vec<Option<usize>>,
}

impl TraceGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, trace: usize, line: usize) -> usize {
        self.offsets[trace] + line
    }

    pub fn trace_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    pub(crate) fn neighbors(&self, v: usize) -> &FixedBitSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones(..)
    }

    /// Edges `(a, b)` with `a < b`, in order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in self.adj[a].ones().filter(|&b| b > a) {
                out.push((a, b));
            }
        }
        out
    }

    /// Vertices of line 0 of every trace.
    pub fn start_vertices(&self) -> Vec<usize> {
        self.offsets.clone()
    }

    pub fn distinct_ops(&self) -> usize {
        let mut ops: Vec<usize> = self.op_ids.iter().flatten().copied().collect();
        ops.sort_unstable();
        ops.dedup();
        ops.len()
    }
}

/// Build G(T), comparing every pair of traces including each trace with itself.
pub fn trace_graph(model: &Model, traces: &[ExtendedTrace]) -> TraceGraph {
    let mut int = Interner::default();
    let keys: Vec<_> = traces.iter().map(|t| int.keys(model, t)).collect();
    let mut offsets = Vec::with_capacity(traces.len());
    let mut vertices = Vec::new();
    for (ti, t) in traces.iter().enumerate() {
        offsets.push(vertices.len());
        for li in 0..t.states.len() {
            let id = vertices.len();
            vertices.push(Vertex {
                at: LineRef { trace: ti, line: li },
                op: if li == 0 { None } else { Some(t.ops[li - 1].clone()) },
                word: int.words[keys[ti].1[li]].clone(),
                succ: if li < t.ops.len() { Some(id + 1) } else { None },
            });
        }
    }
    let n = vertices.len();
    let mut adj = vec![FixedBitSet::with_capacity(n); n];
    for a in 0..traces.len() {
        for b in a..traces.len() {
            let u = compute(
                &LineKeys { ops: &keys[a].0, words: &keys[a].1 },
                &LineKeys { ops: &keys[b].0, words: &keys[b].1 },
            );
            for i in 0..=traces[a].len() {
                for j in 0..=traces[b].len() {
                    if u.get(i, j) {
                        let (va, vb) = (offsets[a] + i, offsets[b] + j);
                        adj[va].insert(vb);
                        adj[vb].insert(va);
                    }
                }
            }
        }
    }
    let word_ids = keys.iter().flat_map(|k| k.1.iter().copied()).collect();
    let op_ids = keys.iter().flat_map(|k| k.0.iter().copied()).collect();
    TraceGraph { vertices, adj, offsets, word_ids, op_ids }
}
