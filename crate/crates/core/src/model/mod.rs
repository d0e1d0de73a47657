//! Models of computation: typed variables, parallel-assignment operations and
//! predicates, plus the machine states they act on.

pub mod expr;
pub mod functions;
pub mod types;
pub mod vm;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};
use thiserror::Error;

pub use expr::{EvalError, Expr, ParseError};
pub use functions::{FunctionDef, FunctionRegistry};
pub use types::{TypeTag, Value};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeTag,
}

/// A parallel assignment. Variables absent from the map keep their value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Operation {
    pub name: String,
    pub assignments: BTreeMap<String, Expr>,
}

impl Operation {
    pub fn new(name: &str, assignments: BTreeMap<String, Expr>) -> Self {
        Operation { name: name.to_string(), assignments }
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.assignments.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> =
            self.assignments.iter().map(|(v, e)| format!("{v} <- {e}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    /// Formula as written; may mention earlier predicates by name.
    pub formula: Expr,
    /// Formula with predicate references inlined.
    pub expanded: Expr,
}

/// A valuation of the model's variables, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MachineState {
    pub values: Vec<Value>,
}

impl MachineState {
    pub fn new(values: Vec<Value>) -> Self {
        MachineState { values }
    }

    /// Convenience for all-integer models such as counter machines.
    pub fn ints(values: &[i64]) -> Self {
        MachineState { values: values.iter().map(|&n| Value::Int(n)).collect() }
    }
}

/// Predicate word. `None` marks a predicate that could not be evaluated
/// (rendered `?`), which only arises from lenient observation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Option<bool>>);

impl Word {
    pub fn complete(bits: &[bool]) -> Self {
        Word(bits.iter().map(|&b| Some(b)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    pub fn bit(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied().flatten()
    }

    /// All complete words of length `k`, in binary counting order of the bits.
    pub fn all(k: usize) -> Vec<Word> {
        (0..1u64 << k)
            .map(|n| Word((0..k).map(|i| Some(n >> (k - 1 - i) & 1 == 1)).collect()))
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            let c = match b {
                Some(true) => '1',
                Some(false) => '0',
                None => '?',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = String;

    fn from_str(s: &str) -> Result<Word, String> {
        s.chars()
            .map(|c| match c {
                '1' => Ok(Some(true)),
                '0' => Ok(Some(false)),
                '?' => Ok(None),
                _ => Err(format!("bad predicate word `{s}`: expected 0, 1 or ?")),
            })
            .collect::<Result<_, _>>()
            .map(Word)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate operation `{0}`")]
    DuplicateOperation(String),
    #[error("duplicate predicate `{0}`")]
    DuplicatePredicate(String),
    #[error("operation `{op}` assigns unknown variable `{var}`")]
    UnknownTarget { op: String, var: String },
    #[error("unknown builtin group `{0}`")]
    UnknownBuiltin(String),
    #[error("{context}: {source}")]
    Parse { context: String, source: ParseError },
    #[error("{context}: {source}")]
    Type { context: String, source: EvalError },
}

/// Variable names: `[A-Za-z][A-Za-z0-9_']*`, not a reserved word.
pub fn is_variable_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !expr::RESERVED.contains(&s)
}

/// Operation, predicate and program-state names: non-empty, no whitespace,
/// none of `& | ! ( )`, and not `true`/`false`.
pub fn is_label_name(s: &str) -> bool {
    !s.is_empty()
        && !s.chars().any(|c| c.is_whitespace() || "&|!()¬∧∨".contains(c))
        && !["true", "false", "⊤", "⊥"].contains(&s)
}

#[derive(Debug, Clone)]
pub struct Model {
    variables: Vec<Variable>,
    var_index: HashMap<String, usize>,
    functions: FunctionRegistry,
    builtins: Vec<String>,
    operations: Vec<Operation>,
    op_index: HashMap<String, usize>,
    predicates: Vec<Predicate>,
    pred_index: HashMap<String, usize>,
}

struct Scope<'a> {
    model: &'a Model,
}

impl expr::TypeEnv for Scope<'_> {
    fn var_type(&self, name: &str) -> Option<&TypeTag> {
        self.model.var_index.get(name).map(|&i| &self.model.variables[i].ty)
    }

    fn signature(&self, name: &str) -> Option<(&[TypeTag], &TypeTag)> {
        self.model.functions.get(name).map(|f| (f.params.as_slice(), &f.result))
    }
}

/// Evaluation environment binding a model to one machine state.
pub struct StateEnv<'a> {
    pub model: &'a Model,
    pub state: &'a MachineState,
}

impl expr::Env for StateEnv<'_> {
    fn lookup(&self, name: &str) -> Result<&Value, EvalError> {
        self.model
            .var_index
            .get(name)
            .and_then(|&i| self.state.values.get(i))
            .ok_or_else(|| EvalError::UnknownVariable(name.to_string()))
    }

    fn call(&self, name: &str, args: &[Value]) -> Result<Value, EvalError> {
        self.model
            .functions
            .get(name)
            .ok_or_else(|| EvalError::UnknownFunction(name.to_string()))?
            .call(args)
    }
}

/// Incremental model construction; errors surface from [`ModelBuilder::build`].
#[derive(Default)]
pub struct ModelBuilder {
    variables: Vec<Variable>,
    functions: FunctionRegistry,
    builtins: Vec<String>,
    operations: Vec<Operation>,
    predicates: Vec<(String, Expr)>,
    error: Option<ModelError>,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn fail(&mut self, e: ModelError) {
        self.error.get_or_insert(e);
    }

    pub fn variable(mut self, name: &str, ty: TypeTag) -> Self {
        self.variables.push(Variable { name: name.to_string(), ty });
        self
    }

    pub fn builtin(mut self, group: &str) -> Self {
        if self.functions.enable(group) {
            self.builtins.push(group.to_string());
        } else {
            self.fail(ModelError::UnknownBuiltin(group.to_string()));
        }
        self
    }

    pub fn function(mut self, def: FunctionDef) -> Self {
        self.functions.register(def);
        self
    }

    pub fn operation(mut self, name: &str, assign: &[(&str, &str)]) -> Self {
        let mut map = BTreeMap::new();
        for (var, src) in assign {
            match src.parse::<Expr>() {
                Ok(e) => {
                    map.insert(var.to_string(), e);
                }
                Err(source) => {
                    self.fail(ModelError::Parse {
                        context: format!("operation `{name}`, variable `{var}`"),
                        source,
                    });
                }
            }
        }
        self.operations.push(Operation::new(name, map));
        self
    }

    pub fn operation_exprs(mut self, op: Operation) -> Self {
        self.operations.push(op);
        self
    }

    pub fn predicate(mut self, name: &str, formula: &str) -> Self {
        match formula.parse::<Expr>() {
            Ok(e) => self.predicates.push((name.to_string(), e)),
            Err(source) => {
                self.fail(ModelError::Parse { context: format!("predicate `{name}`"), source })
            }
        }
        self
    }

    pub fn build(self) -> Result<Model, ModelError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let mut m = Model {
            variables: Vec::new(),
            var_index: HashMap::new(),
            functions: self.functions,
            builtins: self.builtins,
            operations: Vec::new(),
            op_index: HashMap::new(),
            predicates: Vec::new(),
            pred_index: HashMap::new(),
        };
        for v in self.variables {
            if !is_variable_name(&v.name) {
                return Err(ModelError::InvalidName(v.name));
            }
            if m.var_index.insert(v.name.clone(), m.variables.len()).is_some() {
                return Err(ModelError::DuplicateVariable(v.name));
            }
            m.variables.push(v);
        }
        for op in self.operations {
            if !is_label_name(&op.name) {
                return Err(ModelError::InvalidName(op.name));
            }
            if m.op_index.contains_key(&op.name) {
                return Err(ModelError::DuplicateOperation(op.name));
            }
            for (var, e) in &op.assignments {
                let ty = match m.var_index.get(var) {
                    Some(&i) => m.variables[i].ty.clone(),
                    None => {
                        return Err(ModelError::UnknownTarget { op: op.name, var: var.clone() })
                    }
                };
                e.check_against(&Scope { model: &m }, &ty).map_err(|source| ModelError::Type {
                    context: format!("operation `{}`, variable `{var}`", op.name),
                    source,
                })?;
            }
            m.op_index.insert(op.name.clone(), m.operations.len());
            m.operations.push(op);
        }
        for (name, formula) in self.predicates {
            if !is_label_name(&name) {
                return Err(ModelError::InvalidName(name));
            }
            if m.pred_index.contains_key(&name) {
                return Err(ModelError::DuplicatePredicate(name));
            }
            let expanded = {
                let lookup = |v: &str| -> Option<Expr> {
                    if m.var_index.contains_key(v) {
                        return None;
                    }
                    m.pred_index.get(v).map(|&i| m.predicates[i].expanded.clone())
                };
                formula.substitute(&lookup)
            };
            expanded.check_against(&Scope { model: &m }, &TypeTag::Bool).map_err(|source| {
                ModelError::Type { context: format!("predicate `{name}`"), source }
            })?;
            m.pred_index.insert(name.clone(), m.predicates.len());
            m.predicates.push(Predicate { name, formula, expanded });
        }
        Ok(m)
    }
}

impl Model {
    pub fn builder() -> ModelBuilder {
        ModelBuilder::new()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_index.get(name).copied()
    }

    pub fn functions(&self) -> &FunctionRegistry {
        &self.functions
    }

    pub fn builtins(&self) -> &[String] {
        &self.builtins
    }

    pub fn operations(&self) -> &[Operation] {
        &self.operations
    }

    pub fn operation(&self, name: &str) -> Option<&Operation> {
        self.op_index.get(name).map(|&i| &self.operations[i])
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn predicate_index(&self, name: &str) -> Option<usize> {
        self.pred_index.get(name).copied()
    }

    pub fn predicate_names(&self) -> Vec<&str> {
        self.predicates.iter().map(|p| p.name.as_str()).collect()
    }

    /// Type-check an expression against this model.
    pub fn type_of(&self, e: &Expr) -> Result<TypeTag, EvalError> {
        e.type_of(&Scope { model: self })
    }

    pub fn check_expr(&self, e: &Expr, want: &TypeTag) -> Result<(), EvalError> {
        e.check_against(&Scope { model: self }, want)
    }

    /// A state with every variable unassigned.
    pub fn blank_state(&self) -> MachineState {
        MachineState::new(vec![Value::Undefined; self.variables.len()])
    }

    /// Build a state from `(name, value)` pairs; omitted variables are unassigned.
    pub fn state(&self, pairs: &[(&str, Value)]) -> Result<MachineState, String> {
        let mut s = self.blank_state();
        for (name, v) in pairs {
            let i = self.var_index(name).ok_or_else(|| format!("unknown variable `{name}`"))?;
            if !self.variables[i].ty.admits(v) {
                return Err(format!("value {v} does not fit `{name}`: {}", self.variables[i].ty));
            }
            s.values[i] = v.clone();
        }
        Ok(s)
    }

    pub fn get<'s>(&self, state: &'s MachineState, name: &str) -> Option<&'s Value> {
        self.var_index(name).and_then(|i| state.values.get(i))
    }

    pub fn eval(&self, state: &MachineState, e: &Expr) -> Result<Value, EvalError> {
        e.eval(&StateEnv { model: self, state })
    }

    /// Evaluate every right-hand side against `state`, then assign all at once.
    pub fn apply(&self, state: &MachineState, op: &Operation) -> Result<MachineState, EvalError> {
        let env = StateEnv { model: self, state };
        let mut updates = Vec::with_capacity(op.assignments.len());
        for (var, e) in &op.assignments {
            let i = self.var_index(var).ok_or_else(|| EvalError::UnknownVariable(var.clone()))?;
            let ty = &self.variables[i].ty;
            let v = ty.coerce(e.eval(&env)?);
            if !ty.admits(&v) {
                return Err(EvalError::TypeMismatch(format!(
                    "`{var}` <- {e} produced {v}, not a {ty}"
                )));
            }
            updates.push((i, v));
        }
        let mut next = state.clone();
        for (i, v) in updates {
            next.values[i] = v;
        }
        Ok(next)
    }

    /// Apply the operation called `name`.
    pub fn apply_named(&self, state: &MachineState, name: &str) -> Result<MachineState, EvalError> {
        let op = self.operation(name).ok_or_else(|| EvalError::UnknownOperation(name.to_string()))?;
        self.apply(state, op)
    }

    pub fn eval_predicate(&self, i: usize, state: &MachineState) -> Result<bool, EvalError> {
        match self.eval(state, &self.predicates[i].expanded)? {
            Value::Bool(b) => Ok(b),
            other => Err(EvalError::TypeMismatch(format!(
                "predicate `{}` produced {}",
                self.predicates[i].name,
                other.kind()
            ))),
        }
    }

    /// All predicate values in declaration order; fails if any cannot be evaluated.
    pub fn predicate_word(&self, state: &MachineState) -> Result<Word, EvalError> {
        (0..self.predicates.len())
            .map(|i| self.eval_predicate(i, state).map(Some))
            .collect::<Result<_, _>>()
            .map(Word)
    }

    /// Like [`Model::predicate_word`], but predicates that fail to evaluate give `?`.
    pub fn observe(&self, state: &MachineState) -> Word {
        Word((0..self.predicates.len()).map(|i| self.eval_predicate(i, state).ok()).collect())
    }

    pub fn indistinguishable(&self, s: &MachineState, t: &MachineState) -> Result<bool, EvalError> {
        Ok(self.predicate_word(s)? == self.predicate_word(t)?)
    }

    /// Short human rendering such as `(ca=1, cb=1, l=.)`.
    pub fn show(&self, state: &MachineState) -> String {
        let parts: Vec<String> = self
            .variables
            .iter()
            .zip(&state.values)
            .map(|(v, x)| format!("{}={x}", v.name))
            .collect();
        format!("({})", parts.join(", "))
    }

    /// JSON object with one entry per variable (`null` when unassigned).
    pub fn state_to_json(&self, state: &MachineState) -> Json {
        let mut m = Map::new();
        for (v, x) in self.variables.iter().zip(&state.values) {
            m.insert(v.name.clone(), x.to_json());
        }
        Json::Object(m)
    }

    /// Parse a `{var: value}` object; omitted variables are unassigned.
    pub fn state_from_json(&self, j: &Json) -> Result<MachineState, String> {
        let obj = j.as_object().ok_or("a state must be a JSON object")?;
        let mut s = self.blank_state();
        for (name, val) in obj {
            let i = self.var_index(name).ok_or_else(|| format!("unknown variable `{name}`"))?;
            s.values[i] = Value::from_json(&self.variables[i].ty, val)
                .map_err(|e| format!("variable `{name}`: {e}"))?;
        }
        Ok(s)
    }

    pub fn from_file(file: ModelFile) -> Result<Model, ModelError> {
        let mut b = ModelBuilder::new();
        for v in file.variables {
            b = b.variable(&v.name, v.ty);
        }
        for g in &file.builtins {
            b = b.builtin(g);
        }
        for op in &file.operations {
            let pairs: Vec<(&str, &str)> =
                op.assign.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
            b = b.operation(&op.name, &pairs);
        }
        for p in &file.predicates {
            b = b.predicate(&p.name, &p.formula);
        }
        b.build()
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            variables: self.variables.clone(),
            operations: self
                .operations
                .iter()
                .map(|op| OperationDecl {
                    name: op.name.clone(),
                    assign: op.assignments.iter().map(|(k, e)| (k.clone(), e.to_string())).collect(),
                })
                .collect(),
            predicates: self
                .predicates
                .iter()
                .map(|p| PredicateDecl { name: p.name.clone(), formula: p.formula.to_string() })
                .collect(),
            builtins: self.builtins.clone(),
        }
    }

    pub fn from_json_str(src: &str) -> Result<Model, crate::io::LoadError> {
        let file: ModelFile = crate::io::parse_json(src)?;
        Model::from_file(file).map_err(crate::io::LoadError::from)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationDecl {
    pub name: String,
    #[serde(default)]
    pub assign: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub name: String,
    pub formula: String,
}

/// On-disk model description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub variables: Vec<Variable>,
    #[serde(default)]
    pub operations: Vec<OperationDecl>,
    #[serde(default)]
    pub predicates: Vec<PredicateDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub builtins: Vec<String>,
}

/// The counter machine CM_k: registers `R1..Rk` over the naturals, operations
/// `Ri+1` and `Ri-1` (decrement saturates at 0) and zero tests `Ri=0`.
pub fn counter_machine(k: usize) -> Model {
    assert!(k >= 1, "counter machine needs at least one register");
    let mut b = ModelBuilder::new();
    for i in 1..=k {
        b = b.variable(&format!("R{i}"), TypeTag::NAT);
    }
    for i in 1..=k {
        let r = format!("R{i}");
        b = b
            .operation(&format!("{r}+1"), &[(&r, &format!("{r} + 1"))])
            .operation(&format!("{r}-1"), &[(&r, &format!("{r} - 1"))]);
    }
    for i in 1..=k {
        b = b.predicate(&format!("R{i}=0"), &format!("R{i} = 0"));
    }
    b.build().expect("counter machine model is well-formed")
}
