use serde::{Deserialize, Serialize};

use super::MethodError;
use crate::program::{Formula, Program};

/// Binary decision diagram over predicate names; leaves name successor states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecisionTree {
    Leaf {
        goto: String,
    },
    Node {
        pred: String,
        #[serde(rename = "true")]
        yes: Box<DecisionTree>,
        #[serde(rename = "false")]
        no: Box<DecisionTree>,
    },
}

impl DecisionTree {
    pub fn leaf(goto: &str) -> Self {
        DecisionTree::Leaf { goto: goto.to_string() }
    }

    pub fn node(pred: &str, yes: DecisionTree, no: DecisionTree) -> Self {
        DecisionTree::Node { pred: pred.to_string(), yes: Box::new(yes), no: Box::new(no) }
    }

    /// Predicate names in order of first occurrence.
    pub fn predicates(&self) -> Vec<String> {
        fn go(t: &DecisionTree, out: &mut Vec<String>) {
            if let DecisionTree::Node { pred, yes, no } = t {
                if !out.contains(pred) {
                    out.push(pred.clone());
                }
                go(no, out);
                go(yes, out);
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn from_json_str(src: &str) -> Result<DecisionTree, crate::io::LoadError> {
        crate::io::parse_json(src)
    }

    /// Successor chosen for the given predicate values.
    pub fn decide(&self, value: &mut dyn FnMut(&str) -> bool) -> &str {
        match self {
            DecisionTree::Leaf { goto } => goto,
            DecisionTree::Node { pred, yes, no } => {
                if value(pred) {
                    yes.decide(value)
                } else {
                    no.decide(value)
                }
            }
        }
    }
}

/// One edge predicate per distinct leaf target, in order of first leaf
/// (false branches first). Paths to the same target are joined with `|`.
pub fn expand_decision_tree(
    dt: &DecisionTree,
    from: &str,
    program: Option<&Program>,
) -> Result<Vec<(String, String, Formula)>, MethodError> {
    fn go(
        t: &DecisionTree,
        lits: &mut Vec<(String, bool)>,
        out: &mut Vec<(String, Vec<Formula>)>,
    ) -> Result<(), MethodError> {
        match t {
            DecisionTree::Leaf { goto } => {
                let conj = Formula::and(
                    lits.iter()
                        .map(|(p, v)| if *v { Formula::pred(p) } else { Formula::not(Formula::pred(p)) })
                        .collect(),
                );
                match out.iter_mut().find(|(g, _)| g == goto) {
                    Some((_, fs)) => fs.push(conj),
                    None => out.push((goto.clone(), vec![conj])),
                }
            }
            DecisionTree::Node { pred, yes, no } => {
                if lits.iter().any(|(p, _)| p == pred) {
                    return Err(MethodError::RepeatedPredicate(pred.clone()));
                }
                lits.push((pred.clone(), false));
                go(no, lits, out)?;
                lits.last_mut().unwrap().1 = true;
                go(yes, lits, out)?;
                lits.pop();
            }
        }
        Ok(())
    }
    let mut leaves = Vec::new();
    go(dt, &mut Vec::new(), &mut leaves)?;
    if let Some(p) = program {
        if p.index_of(from).is_none() {
            return Err(MethodError::UnknownState(from.to_string()));
        }
        if let Some((g, _)) = leaves.iter().find(|(g, _)| p.index_of(g).is_none()) {
            return Err(MethodError::UnknownState(g.clone()));
        }
    }
    Ok(leaves.into_iter().map(|(to, fs)| (from.to_string(), to, Formula::or(fs))).collect())
}
