//! Virtual-machine models at the signature level: which single assignments,
//! parallel assignments and predicates a set of typed variables and function
//! symbols gives rise to. Types here are plain names (e.g. `float`), since
//! counting does not need values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Expr, Operation};

/// Name of the boolean type; functions into it yield predicates.
pub const BOOL: &str = "bool";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VmVariable {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VmFunction {
    pub name: String,
    pub params: Vec<String>,
    pub result: String,
}

/// Variables and function symbols of a virtual machine.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VmSignature {
    pub variables: Vec<VmVariable>,
    pub functions: Vec<VmFunction>,
}

/// `target <- function(args)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Assignment {
    pub target: String,
    pub function: String,
    pub args: Vec<String>,
}

impl Assignment {
    pub fn expr(&self) -> Expr {
        Expr::Call(self.function.clone(), self.args.iter().map(|a| Expr::Var(a.clone())).collect())
    }
}

impl VmSignature {
    pub fn new(variables: &[(&str, &str)], functions: &[(&str, &[&str], &str)]) -> Self {
        VmSignature {
            variables: variables
                .iter()
                .map(|(n, t)| VmVariable { name: n.to_string(), ty: t.to_string() })
                .collect(),
            functions: functions
                .iter()
                .map(|(n, ps, r)| VmFunction {
                    name: n.to_string(),
                    params: ps.iter().map(|p| p.to_string()).collect(),
                    result: r.to_string(),
                })
                .collect(),
        }
    }

    /// All variable sequences matching `params` position by position.
    fn argument_sequences(&self, params: &[String], distinct: bool) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new()];
        for p in params {
            let mut next = Vec::new();
            for prefix in &out {
                for v in self.variables.iter().filter(|v| &v.ty == p) {
                    if distinct && prefix.contains(&v.name) {
                        continue;
                    }
                    let mut seq = prefix.clone();
                    seq.push(v.name.clone());
                    next.push(seq);
                }
            }
            out = next;
        }
        out
    }

    /// Valid single assignments `v <- f(x1..xk)`: the result type of `f`
    /// matches `v` and the arguments match the parameter types. Arguments may
    /// repeat.
    pub fn valid_assignments(&self) -> Vec<Assignment> {
        let mut out = Vec::new();
        for v in &self.variables {
            for f in self.functions.iter().filter(|f| f.result == v.ty) {
                for args in self.argument_sequences(&f.params, false) {
                    out.push(Assignment { target: v.name.clone(), function: f.name.clone(), args });
                }
            }
        }
        out
    }

    fn choices_per_target(&self) -> BTreeMap<&str, Vec<Assignment>> {
        let mut per: BTreeMap<&str, Vec<Assignment>> = BTreeMap::new();
        for a in self.valid_assignments() {
            let key = self.variables.iter().find(|v| v.name == a.target).unwrap().name.as_str();
            per.entry(key).or_default().push(a);
        }
        per
    }

    /// Number of parallel assignments: product over variables of (choices + 1).
    pub fn operations_count(&self) -> u128 {
        self.choices_per_target().values().map(|c| c.len() as u128 + 1).product()
    }

    /// Every parallel assignment (each variable assigned at most once), named
    /// `op0`, `op1`, ... in enumeration order. The empty one comes first.
    pub fn enumerate_parallel_assignments(&self) -> Vec<Operation> {
        let per = self.choices_per_target();
        let mut partial: Vec<BTreeMap<String, Expr>> = vec![BTreeMap::new()];
        for choices in per.values() {
            let mut next = Vec::with_capacity(partial.len() * (choices.len() + 1));
            for p in &partial {
                next.push(p.clone());
                for a in choices {
                    let mut q = p.clone();
                    q.insert(a.target.clone(), a.expr());
                    next.push(q);
                }
            }
            partial = next;
        }
        partial
            .into_iter()
            .enumerate()
            .map(|(i, m)| Operation::new(&format!("op{i}"), m))
            .collect()
    }

    /// Predicates `f(x1..xk)` for functions into `bool`. By default argument
    /// sequences with a repeated variable are excluded.
    pub fn predicates(&self, allow_repeated_args: bool) -> Vec<Assignment> {
        let mut out = Vec::new();
        for f in self.functions.iter().filter(|f| f.result == BOOL) {
            for args in self.argument_sequences(&f.params, !allow_repeated_args) {
                out.push(Assignment { target: String::new(), function: f.name.clone(), args });
            }
        }
        out
    }
}
