//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use tracesynth::model::{counter_machine, MachineState, Model};
use tracesynth::program::{Edge, EdgePredicate, Program, StateDef};
use tracesynth::model::Word;
use tracesynth::trace::ExtendedTrace;

pub const CM2_OPS: [&str; 4] = ["R1+1", "R1-1", "R2+1", "R2-1"];

pub fn cm2() -> Model {
    counter_machine(2)
}

pub fn s(a: i64, b: i64) -> MachineState {
    MachineState::ints(&[a, b])
}

/// Apply `ops` from `start`.
pub fn walk(m: &Model, start: MachineState, ops: &[&str]) -> ExtendedTrace {
    let mut states = vec![start];
    for op in ops {
        let next = m.apply_named(states.last().unwrap(), op).unwrap();
        states.push(next);
    }
    ExtendedTrace::new(states, ops.iter().map(|o| o.to_string()).collect())
}

/// Unmergeability straight from the recursive definition: lines differ in
/// operation, or have equal words and unmergeable successors; a last line
/// against a non-last line is unmergeable, two last lines are not.
pub fn oracle_unmergeable(m: &Model, x: &ExtendedTrace, i: usize, y: &ExtendedTrace, j: usize) -> bool {
    let (n, k) = (x.len(), y.len());
    let op = |t: &ExtendedTrace, l: usize| if l == 0 { None } else { Some(t.ops[l - 1].clone()) };
    if (i == 0) != (j == 0) {
        return true;
    }
    if op(x, i) != op(y, j) {
        return true;
    }
    if m.observe(&x.states[i]) != m.observe(&y.states[j]) {
        return false;
    }
    match (i == n, j == k) {
        (true, true) => false,
        (true, false) | (false, true) => true,
        (false, false) => oracle_unmergeable(m, x, i + 1, y, j + 1),
    }
}

pub struct Lines {
    /// (trace, line) of every vertex.
    pub at: Vec<(usize, usize)>,
    pub words: Vec<Word>,
    pub succ: Vec<Option<usize>>,
    pub adj: Vec<Vec<bool>>,
    pub starts: Vec<usize>,
}

pub fn lines(m: &Model, ts: &[ExtendedTrace]) -> Lines {
    let mut at = Vec::new();
    let mut words = Vec::new();
    let mut succ = Vec::new();
    let mut starts = Vec::new();
    for (t, x) in ts.iter().enumerate() {
        starts.push(at.len());
        for l in 0..x.states.len() {
            let id = at.len();
            at.push((t, l));
            words.push(m.observe(&x.states[l]));
            succ.push((l < x.len()).then_some(id + 1));
        }
    }
    let n = at.len();
    let mut adj = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            let ((ta, la), (tb, lb)) = (at[a], at[b]);
            adj[a][b] = oracle_unmergeable(m, &ts[ta], la, &ts[tb], lb);
        }
    }
    Lines { at, words, succ, adj, starts }
}

/// Proper and restricted, with every line 0 in one color.
pub fn restricted_ok(l: &Lines, c: &[usize]) -> bool {
    let n = c.len();
    if l.starts.iter().any(|&v| c[v] != c[l.starts[0]]) {
        return false;
    }
    for a in 0..n {
        for b in 0..n {
            if c[a] != c[b] {
                continue;
            }
            if l.adj[a][b] {
                return false;
            }
            if l.words[a] == l.words[b] {
                match (l.succ[a], l.succ[b]) {
                    (None, None) => {}
                    (Some(x), Some(y)) if c[x] == c[y] => {}
                    _ => return false,
                }
            }
        }
    }
    true
}

/// Fewest colors over all set partitions of the lines, or `None`.
pub fn brute_min_colors(m: &Model, ts: &[ExtendedTrace]) -> Option<usize> {
    let l = lines(m, ts);
    let n = l.at.len();
    let mut best: Option<usize> = None;
    let mut c = vec![0usize; n];
    fn rec(l: &Lines, c: &mut Vec<usize>, v: usize, used: usize, best: &mut Option<usize>) {
        if best.map_or(false, |b| used >= b) && v < c.len() {
            return;
        }
        if v == c.len() {
            if restricted_ok(l, c) && best.map_or(true, |b| used < b) {
                *best = Some(used);
            }
            return;
        }
        for col in 0..=used {
            c[v] = col;
            rec(l, c, v + 1, used.max(col + 1), best);
        }
    }
    if n == 0 {
        return Some(1);
    }
    c[0] = 0;
    rec(&l, &mut c, 1, 1, &mut best);
    best
}

/// A random deterministic cm2 program: `n` states (start included), each
/// operation state labelled with a random operation, and for every source
/// state and each of the 4 predicate words either one target or none.
pub fn random_program<R: Rng>(rng: &mut R, n: usize) -> Program {
    let mut states = vec![StateDef { name: "Start".into(), op: None, terminal: false, noop: false }];
    for i in 1..n {
        let op = CM2_OPS[rng.gen_range(0..4)];
        states.push(StateDef { name: format!("q{i}"), op: Some(op.into()), terminal: false, noop: false });
    }
    let mut edges: Vec<Edge> = Vec::new();
    for from in 0..n {
        let mut per_target: Vec<BTreeSet<Word>> = vec![BTreeSet::new(); n];
        for w in Word::all(2) {
            if n > 1 && rng.gen_bool(0.7) {
                per_target[rng.gen_range(1..n)].insert(w);
            }
        }
        for (to, ws) in per_target.into_iter().enumerate() {
            if !ws.is_empty() {
                edges.push(Edge { from, to, when: Some(EdgePredicate::Words(ws)) });
            }
        }
    }
    Program::new(states, "Start", edges).unwrap()
}

pub fn grid(max: i64) -> Vec<MachineState> {
    let mut v = Vec::new();
    for x in 0..=max {
        for y in 0..=max {
            v.push(s(x, y));
        }
    }
    v
}

/// A random set of 1 to 3 cm2 extended traces with at most `max_lines`
/// lines in total. Half of the sets come from runs of a random program,
/// the rest are random walks.
pub fn random_trace_set<R: Rng>(rng: &mut R, max_lines: usize) -> Vec<ExtendedTrace> {
    let m = cm2();
    let count = rng.gen_range(1..=3usize);
    let mut out = Vec::new();
    let mut budget = max_lines;
    if rng.gen_bool(0.5) {
        let n = rng.gen_range(2..=4);
        let p = random_program(rng, n);
        for _ in 0..count {
            let start = s(rng.gen_range(0..3), rng.gen_range(0..3));
            let r = tracesynth::program::run(&m, &p, &start, None, (budget.saturating_sub(1)) as u64);
            if r.terminated() && r.trace.len() <= budget {
                budget -= r.trace.len();
                out.push(ExtendedTrace::new(r.trace, r.ops));
            }
        }
    }
    while out.len() < count && budget > 0 {
        let len = rng.gen_range(0..budget.min(5));
        let start = s(rng.gen_range(0..3), rng.gen_range(0..3));
        let ops: Vec<&str> = (0..len).map(|_| CM2_OPS[rng.gen_range(0..4)]).collect();
        budget -= len + 1;
        out.push(walk(&m, start, &ops));
    }
    if out.is_empty() {
        out.push(walk(&m, s(0, 0), &[]));
    }
    out
}
