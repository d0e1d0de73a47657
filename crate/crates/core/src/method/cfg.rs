use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{MethodError, RowRef};
use crate::program::{Edge, Program, StateDef};
use crate::synthesis::START;
use crate::trace::GeneralizedTrace;

/// Program skeleton from named traces: one state per operation, an edge for
/// every pair of consecutive rows and from the start to every first row.
/// Operations that only ever end traces become terminal states.
pub fn synthesize_cfg(gts: &[GeneralizedTrace]) -> Result<Program, MethodError> {
    let mut states = vec![StateDef { name: START.into(), op: None, terminal: false, noop: false }];
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    for (t, gt) in gts.iter().enumerate() {
        let mut prev = 0;
        for (r, row) in gt.rows.iter().enumerate() {
            let name = row.op.as_ref().ok_or(MethodError::UnnamedRow(RowRef { trace: t, row: r + 1 }))?;
            let v = *index.entry(name.clone()).or_insert_with(|| {
                states.push(StateDef { name: name.clone(), op: Some(name.clone()), terminal: false, noop: false });
                states.len() - 1
            });
            if !edges.iter().any(|e| e.from == prev && e.to == v) {
                edges.push(Edge { from: prev, to: v, when: None });
            }
            prev = v;
        }
    }
    // An operation that ends a trace and is never followed is terminal.
    for gt in gts {
        if let Some(last) = gt.rows.last().and_then(|r| r.op.as_ref()) {
            let v = index[last];
            if !edges.iter().any(|e| e.from == v) {
                states[v].terminal = true;
            }
        }
    }
    Program::new(states, START, edges).map_err(MethodError::Program)
}

/// Edge paths from `from` to a non-noop state with operation `op` whose
/// intermediate states are all noop states.
pub(crate) fn op_paths(p: &Program, from: usize, op: &str) -> Vec<Vec<usize>> {
    fn walk(p: &Program, at: usize, op: &str, path: &mut Vec<usize>, seen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for &e in p.outgoing(at) {
            let to = p.edges()[e].to;
            let st = p.state(to);
            path.push(e);
            if st.noop {
                if !seen.contains(&to) {
                    seen.push(to);
                    walk(p, to, op, path, seen, out);
                    seen.pop();
                }
            } else if st.op.as_deref() == Some(op) {
                out.push(path.clone());
            }
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(p, from, op, &mut Vec::new(), &mut vec![from], &mut out);
    out
}

/// States whose operation is `op`.
pub(crate) fn states_for(p: &Program, op: &str) -> Vec<usize> {
    (0..p.states().len()).filter(|&i| !p.state(i).noop && p.state(i).op.as_deref() == Some(op)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeWitness {
    pub from: String,
    pub to: String,
    pub witnesses: Vec<RowRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub at: RowRef,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeWitnessReport {
    /// Every program edge, in declaration order, with the rows entering its
    /// target along it (`row` is the later of the two consecutive rows).
    pub edges: Vec<EdgeWitness>,
    pub unwitnessed: Vec<(String, String)>,
    pub unreached: Vec<String>,
    /// Consecutive rows with no connecting path in the program.
    pub unexplained: Vec<Transition>,
}

/// Map consecutive row pairs onto program edges. Transitions may pass
/// through noop states; every edge on such a path is witnessed.
pub fn edge_witnesses(program: &Program, gts: &[GeneralizedTrace]) -> Result<EdgeWitnessReport, MethodError> {
    let mut wit: Vec<BTreeSet<RowRef>> = vec![BTreeSet::new(); program.edges().len()];
    let mut visited: BTreeSet<usize> = BTreeSet::new();
    let mut unexplained = Vec::new();
    for (t, gt) in gts.iter().enumerate() {
        visited.insert(program.start());
        let mut prev = vec![program.start()];
        let mut prev_name = program.start_name().to_string();
        for (r, row) in gt.rows.iter().enumerate() {
            let at = RowRef { trace: t, row: r + 1 };
            let op = row.op.as_deref().ok_or(MethodError::UnnamedRow(at))?;
            let here = states_for(program, op);
            if here.is_empty() {
                return Err(MethodError::UnknownOperationName(op.to_string()));
            }
            let mut found = false;
            for &u in &prev {
                for path in op_paths(program, u, op) {
                    found = true;
                    for e in path {
                        wit[e].insert(at);
                        visited.insert(program.edges()[e].to);
                    }
                }
            }
            if !found {
                unexplained.push(Transition { at, from: prev_name.clone(), to: op.to_string() });
            }
            visited.extend(here.iter().copied());
            prev = here;
            prev_name = op.to_string();
        }
    }
    let edges: Vec<EdgeWitness> = program
        .edges()
        .iter()
        .zip(wit)
        .map(|(e, w)| EdgeWitness {
            from: program.name(e.from).to_string(),
            to: program.name(e.to).to_string(),
            witnesses: w.into_iter().collect(),
        })
        .collect();
    let unwitnessed = edges.iter().filter(|e| e.witnesses.is_empty()).map(|e| (e.from.clone(), e.to.clone())).collect();
    let unreached = (0..program.states().len())
        .filter(|i| !visited.contains(i))
        .map(|i| program.name(i).to_string())
        .collect();
    Ok(EdgeWitnessReport { edges, unwitnessed, unreached, unexplained })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MissingEdge {
    pub from: String,
    pub to: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

/// Pairs of operation states (plus the start as source) with no connecting
/// path through noop states. `comments` is keyed by `"FROM->TO"`.
pub fn missing_edges(program: &Program, comments: &BTreeMap<String, String>) -> Vec<MissingEdge> {
    let n = program.states().len();
    let sources = (0..n).filter(|&i| i == program.start() || (!program.state(i).noop && !program.state(i).terminal));
    let mut out = Vec::new();
    for u in sources {
        for v in 0..n {
            let st = program.state(v);
            if v == program.start() || st.noop {
                continue;
            }
            let op = st.op.as_deref().unwrap_or_default();
            let connected = op_paths(program, u, op).iter().any(|p| p.last().map(|&e| program.edges()[e].to) == Some(v));
            if !connected {
                let (from, to) = (program.name(u).to_string(), st.name.clone());
                let comment = comments.get(&format!("{from}->{to}")).cloned();
                out.push(MissingEdge { from, to, comment });
            }
        }
    }
    out
}
