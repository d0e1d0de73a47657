//! Exact search for restricted colorings of the trace graph.
//!
//! Vertices are merged into groups with a union-find structure. Merging two
//! groups that contain lines with equal predicate words forces their
//! successors together as well (or requires both to be last lines), so every
//! merge is closed under that rule before it is accepted.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::graph::TraceGraph;

/// Color of every vertex of a trace graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coloring(pub Vec<usize>);

impl Coloring {
    pub fn colors_used(&self) -> usize {
        let mut c = self.0.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Last,
    Next(usize),
}

#[derive(Clone)]
struct Group {
    members: FixedBitSet,
    nbrs: FixedBitSet,
    color: Option<usize>,
    succ: BTreeMap<usize, Slot>,
}

#[derive(Clone)]
struct Search {
    parent: Vec<usize>,
    groups: Vec<Option<Group>>,
    color_root: Vec<usize>,
}

impl Search {
    fn new(g: &TraceGraph) -> Self {
        let n = g.len();
        let groups = (0..n)
            .map(|v| {
                let mut members = FixedBitSet::with_capacity(n);
                members.insert(v);
                let slot = g.vertices[v].succ.map_or(Slot::Last, Slot::Next);
                Some(Group {
                    members,
                    nbrs: g.neighbors(v).clone(),
                    color: None,
                    succ: BTreeMap::from([(g.word_ids[v], slot)]),
                })
            })
            .collect();
        Search { parent: (0..n).collect(), groups, color_root: Vec::new() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn color_of(&mut self, v: usize) -> Option<usize> {
        let r = self.find(v);
        self.groups[r].as_ref().unwrap().color
    }

    /// Merge the groups of `a` and `b` and everything the merge forces.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let mut queue = vec![(a, b)];
        while let Some((a, b)) = queue.pop() {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                continue;
            }
            let gb = self.groups[rb].take().unwrap();
            let ga = self.groups[ra].as_mut().unwrap();
            let color = match (ga.color, gb.color) {
                (Some(x), Some(y)) if x != y => return false,
                (x, y) => x.or(y),
            };
            if !ga.members.is_disjoint(&gb.nbrs) {
                return false;
            }
            ga.members.union_with(&gb.members);
            ga.nbrs.union_with(&gb.nbrs);
            ga.color = color;
            for (w, slot) in gb.succ {
                match ga.succ.get(&w).copied() {
                    None => {
                        ga.succ.insert(w, slot);
                    }
                    Some(Slot::Last) if slot == Slot::Last => {}
                    Some(Slot::Next(x)) => match slot {
                        Slot::Next(y) => queue.push((x, y)),
                        Slot::Last => return false,
                    },
                    Some(Slot::Last) => return false,
                }
            }
            self.parent[rb] = ra;
            if let Some(c) = color {
                self.color_root[c] = ra;
            }
        }
        true
    }

    fn paint(&mut self, v: usize) -> usize {
        let r = self.find(v);
        let c = self.color_root.len();
        self.color_root.push(r);
        self.groups[r].as_mut().unwrap().color = Some(c);
        c
    }
}

fn search(g: &TraceGraph, order: &[usize], pos: usize, k: usize, st: Search) -> Option<Search> {
    let mut st = st;
    let mut pos = pos;
    while pos < order.len() && st.color_of(order[pos]).is_some() {
        pos += 1;
    }
    if pos == order.len() {
        return Some(st);
    }
    let v = order[pos];
    for c in 0..st.color_root.len() {
        let mut next = st.clone();
        let target = next.color_root[c];
        if next.union(v, target) {
            if let Some(done) = search(g, order, pos + 1, k, next) {
                return Some(done);
            }
        }
    }
    if st.color_root.len() < k {
        st.paint(v);
        return search(g, order, pos + 1, k, st);
    }
    None
}

/// A restricted coloring with at most `k` colors, all line-0 vertices sharing
/// color 0, or `None` if none exists.
pub fn restricted_coloring(g: &TraceGraph, k: usize) -> Option<Coloring> {
    if g.is_empty() {
        return Some(Coloring(Vec::new()));
    }
    if k == 0 {
        return None;
    }
    let mut st = Search::new(g);
    let starts = g.start_vertices();
    st.paint(starts[0]);
    for &s in &starts[1..] {
        if !st.union(starts[0], s) {
            return None;
        }
    }
    let mut order: Vec<usize> = (0..g.len()).filter(|&v| g.vertices[v].at.line > 0).collect();
    order.sort_by(|&a, &b| {
        let (va, vb) = (&g.vertices[a], &g.vertices[b]);
        (&va.op, va.at).cmp(&(&vb.op, vb.at))
    });
    let mut done = search(g, &order, 0, k, st)?;
    Some(Coloring((0..g.len()).map(|v| done.color_of(v).unwrap()).collect()))
}

/// Reasons a coloring is not a valid restricted coloring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColoringFault {
    WrongLength { expected: usize, got: usize },
    Adjacent { a: usize, b: usize },
    Restriction { a: usize, b: usize },
    StartColors { a: usize, b: usize },
}

/// All faults of `c` as a restricted coloring of `g` in which line-0 vertices share a color.
pub fn coloring_faults(g: &TraceGraph, c: &Coloring) -> Vec<ColoringFault> {
    if c.0.len() != g.len() {
        return vec![ColoringFault::WrongLength { expected: g.len(), got: c.0.len() }];
    }
    let mut out = Vec::new();
    let starts = g.start_vertices();
    if let Some((&first, rest)) = starts.split_first() {
        for &s in rest {
            if c.0[s] != c.0[first] {
                out.push(ColoringFault::StartColors { a: first, b: s });
            }
        }
    }
    for a in 0..g.len() {
        for b in a + 1..g.len() {
            if c.0[a] != c.0[b] {
                continue;
            }
            if g.adjacent(a, b) {
                out.push(ColoringFault::Adjacent { a, b });
            } else if g.word_ids[a] == g.word_ids[b] {
                let ok = match (g.vertices[a].succ, g.vertices[b].succ) {
                    (None, None) => true,
                    (Some(x), Some(y)) => c.0[x] == c.0[y],
                    _ => false,
                };
                if !ok {
                    out.push(ColoringFault::Restriction { a, b });
                }
            }
        }
    }
    out
}
