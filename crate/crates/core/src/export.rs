//! Rendering programs as Graphviz DOT, goto-block pseudocode and nested-if
//! function definitions.
//!
//! Imperative layout, one block per state in declaration order:
//!
//! ```text
//! S_<state>:
//!   s <- <op>(s)
//!   if <predicate> goto S_<target>
//!   goto END
//! END:
//! ```
//!
//! The start state and noop states have no assignment line.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::Word;
use crate::program::{EdgePredicate, Formula, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Dot,
    Imperative,
    Functional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PredicateStyle {
    /// Formulas as written; word sets as `{01,10}`.
    #[default]
    Symbolic,
    /// Word sets as a disjunction of full conjunctions over predicate names.
    Dnf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RenderOptions {
    pub format: Format,
    pub predicates: PredicateStyle,
}

/// The disjunctive normal form of a word set. `?` bits contribute no literal.
pub fn words_to_dnf(words: &std::collections::BTreeSet<Word>, names: &[&str]) -> Formula {
    Formula::or(
        words
            .iter()
            .map(|w| {
                Formula::and(
                    w.0.iter()
                        .zip(names)
                        .filter_map(|(b, n)| b.map(|b| if b { Formula::pred(n) } else { Formula::not(Formula::pred(n)) }))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn predicate_text(p: Option<&EdgePredicate>, style: PredicateStyle, names: &[&str]) -> String {
    match p {
        None => "?".into(),
        Some(EdgePredicate::Symbolic(f)) => f.to_string(),
        Some(EdgePredicate::Words(ws)) => match style {
            PredicateStyle::Dnf => words_to_dnf(ws, names).to_string(),
            PredicateStyle::Symbolic => {
                let ws: Vec<String> = ws.iter().map(Word::to_string).collect();
                format!("{{{}}}", ws.join(","))
            }
        },
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT graph; nodes sorted by name, edges by (source, target, label).
pub fn to_dot(program: &Program, style: PredicateStyle, names: &[&str]) -> String {
    let mut out = String::from("digraph program {\n  node [shape=box];\n");
    let mut nodes: Vec<usize> = (0..program.states().len()).collect();
    nodes.sort_by(|&a, &b| program.name(a).cmp(program.name(b)));
    for i in nodes {
        let st = program.state(i);
        let label = match (&st.op, st.noop) {
            (_, true) => format!("{} (noop)", st.name),
            (Some(op), false) if *op != st.name => format!("{}: {op}", st.name),
            _ => st.name.clone(),
        };
        let mut attrs = vec![format!("label={}", quote(&label))];
        if i == program.start() {
            attrs.push("shape=ellipse".into());
        } else if st.terminal {
            attrs.push("peripheries=2".into());
        } else if st.noop {
            attrs.push("style=dashed".into());
        }
        let _ = writeln!(out, "  {} [{}];", quote(&st.name), attrs.join(", "));
    }
    let mut edges: Vec<(&str, &str, String)> = program
        .edges()
        .iter()
        .map(|e| (program.name(e.from), program.name(e.to), predicate_text(e.when.as_ref(), style, names)))
        .collect();
    edges.sort();
    for (a, b, l) in edges {
        let _ = writeln!(out, "  {} -> {} [label={}];", quote(a), quote(b), quote(&l));
    }
    out.push_str("}\n");
    out
}

/// Goto blocks, one per state in declaration order.
pub fn emit_imperative(program: &Program, style: PredicateStyle, names: &[&str]) -> String {
    let mut out = String::new();
    for (i, st) in program.states().iter().enumerate() {
        let _ = writeln!(out, "S_{}:", st.name);
        if let (Some(op), false) = (&st.op, st.noop) {
            let _ = writeln!(out, "  s <- {op}(s)");
        }
        for &e in program.outgoing(i) {
            let edge = &program.edges()[e];
            let p = predicate_text(edge.when.as_ref(), style, names);
            let _ = writeln!(out, "  if {p} goto S_{}", program.name(edge.to));
        }
        out.push_str("  goto END\n");
    }
    out.push_str("END:\n");
    out
}

/// One function per state: apply the operation, then a nested if over the
/// outgoing edges in declaration order; the final else returns the state.
pub fn emit_functional(program: &Program, style: PredicateStyle, names: &[&str]) -> String {
    let mut out = String::new();
    for (i, st) in program.states().iter().enumerate() {
        let _ = writeln!(out, "f_{}(s) =", st.name);
        match (&st.op, st.noop) {
            (Some(op), false) => {
                let _ = writeln!(out, "  let s' = {op}(s) in");
            }
            _ => out.push_str("  let s' = s in\n"),
        }
        let mut first = true;
        for &e in program.outgoing(i) {
            let edge = &program.edges()[e];
            let p = predicate_text(edge.when.as_ref(), style, names);
            let kw = if first { "if" } else { "else if" };
            let _ = writeln!(out, "  {kw} [{p}](s') then f_{}(s')", program.name(edge.to));
            first = false;
        }
        out.push_str(if first { "  s'\n" } else { "  else s'\n" });
    }
    out
}

pub fn render(program: &Program, opts: RenderOptions, names: &[&str]) -> String {
    match opts.format {
        Format::Dot => to_dot(program, opts.predicates, names),
        Format::Imperative => emit_imperative(program, opts.predicates, names),
        Format::Functional => emit_functional(program, opts.predicates, names),
    }
}
