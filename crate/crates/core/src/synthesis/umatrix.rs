//! Unmergeability of lines of two extended traces.

use crate::model::{Model, Word};
use crate::trace::ExtendedTrace;

/// `U[i][j]` for lines `i` of X (`0..=n+1`) and `j` of Y (`0..=m+1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UMatrix {
    n: usize,
    m: usize,
    bits: Vec<bool>,
}

impl UMatrix {
    /// |X|, the number of operations of X.
    pub fn n(&self) -> usize {
        self.n
    }

    /// |Y|.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i <= self.n + 1 && j <= self.m + 1, "index ({i},{j}) outside the matrix");
        self.bits[i * (self.m + 2) + j]
    }

    fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * (self.m + 2) + j] = v;
    }
}

/// Per-line data the recursion needs: operation id (`None` on line 0) and word.
pub(crate) struct LineKeys<'a> {
    pub ops: &'a [Option<usize>],
    pub words: &'a [usize],
}

pub(crate) fn compute(x: &LineKeys, y: &LineKeys) -> UMatrix {
    let (n, m) = (x.ops.len() - 1, y.ops.len() - 1);
    let mut u = UMatrix { n, m, bits: vec![false; (n + 2) * (m + 2)] };
    for i in 0..=n + 1 {
        u.set(i, m + 1, true);
    }
    for j in 0..=m + 1 {
        u.set(n + 1, j, true);
    }
    u.set(n + 1, m + 1, false);
    for j in 1..=m {
        u.set(0, j, true);
    }
    for i in 1..=n {
        u.set(i, 0, true);
    }
    let cell = |u: &UMatrix, i: usize, j: usize| {
        x.ops[i] != y.ops[j] || (x.words[i] == y.words[j] && u.get(i + 1, j + 1))
    };
    for i in (1..=n).rev() {
        for j in (1..=m).rev() {
            let v = cell(&u, i, j);
            u.set(i, j, v);
        }
    }
    let v = cell(&u, 0, 0);
    u.set(0, 0, v);
    u
}

/// Interning of operation names and words so the recursion compares integers.
#[derive(Default)]
pub(crate) struct Interner {
    pub ops: Vec<String>,
    pub words: Vec<Word>,
}

impl Interner {
    pub fn op(&mut self, name: &str) -> usize {
        match self.ops.iter().position(|o| o == name) {
            Some(i) => i,
            None => {
                self.ops.push(name.to_string());
                self.ops.len() - 1
            }
        }
    }

    pub fn word(&mut self, w: Word) -> usize {
        match self.words.iter().position(|v| *v == w) {
            Some(i) => i,
            None => {
                self.words.push(w);
                self.words.len() - 1
            }
        }
    }

    pub fn keys(&mut self, model: &Model, xt: &ExtendedTrace) -> (Vec<Option<usize>>, Vec<usize>) {
        let ops = std::iter::once(None).chain(xt.ops.iter().map(|o| Some(self.op(o)))).collect();
        let words = xt.states.iter().map(|s| self.word(model.observe(s))).collect();
        (ops, words)
    }
}

/// The unmergeability matrix of two extended traces (predicate words are
/// observed leniently).
pub fn umatrix(model: &Model, x: &ExtendedTrace, y: &ExtendedTrace) -> UMatrix {
    let mut int = Interner::default();
    let (xo, xw) = int.keys(model, x);
    let (yo, yw) = int.keys(model, y);
    compute(&LineKeys { ops: &xo, words: &xw }, &LineKeys { ops: &yo, words: &yw })
}

/// Whether line `i` of X and line `j` of Y can never share a program state.
pub fn unmergeable(model: &Model, x: &ExtendedTrace, i: usize, y: &ExtendedTrace, j: usize) -> bool {
    umatrix(model, x, y).get(i, j)
}
