use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::expr::EvalError;
use super::types::{TypeTag, Value};

pub type Evaluator = Arc<dyn Fn(&[Value]) -> Result<Value, String> + Send + Sync>;

/// A host-registered pure function usable in expressions.
#[derive(Clone)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<TypeTag>,
    pub result: TypeTag,
    pub eval: Evaluator,
}

impl FunctionDef {
    pub fn new(
        name: &str,
        params: Vec<TypeTag>,
        result: TypeTag,
        eval: impl Fn(&[Value]) -> Result<Value, String> + Send + Sync + 'static,
    ) -> FunctionDef {
        FunctionDef { name: name.to_string(), params, result, eval: Arc::new(eval) }
    }

    pub fn call(&self, args: &[Value]) -> Result<Value, EvalError> {
        if args.len() != self.params.len() {
            return Err(EvalError::TypeMismatch(format!(
                "`{}` takes {} argument(s), got {}",
                self.name,
                self.params.len(),
                args.len()
            )));
        }
        (self.eval)(args).map_err(|message| EvalError::Function { name: self.name.clone(), message })
    }
}

impl fmt::Debug for FunctionDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        write!(f, "{}({}) -> {}", self.name, params.join(", "), self.result)
    }
}

#[derive(Debug, Clone, Default)]
pub struct FunctionRegistry {
    functions: BTreeMap<String, FunctionDef>,
}

impl FunctionRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, def: FunctionDef) {
        self.functions.insert(def.name.clone(), def);
    }

    pub fn get(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &FunctionDef> {
        self.functions.values()
    }

    /// Enable a named builtin group. Returns false for unknown names.
    pub fn enable(&mut self, group: &str) -> bool {
        let defs = match group {
            "strings" => string_builtins(),
            "trees" => crate::fixtures::trees::tree_builtins(),
            _ => return false,
        };
        for d in defs {
            self.register(d);
        }
        true
    }
}

pub const BUILTIN_GROUPS: &[&str] = &["strings", "trees"];

fn as_str(v: &Value) -> Result<&str, String> {
    match v {
        Value::Str(s) => Ok(s),
        other => Err(format!("expected string, found {}", other.kind())),
    }
}

fn as_int(v: &Value) -> Result<i64, String> {
    match v {
        Value::Int(n) => Ok(*n),
        other => Err(format!("expected int, found {}", other.kind())),
    }
}

/// `substr(s, offset, length)` (0-based offset, in characters) and
/// `sumlen(a)` (total length of a string array).
pub fn string_builtins() -> Vec<FunctionDef> {
    vec![
        FunctionDef::new(
            "substr",
            vec![TypeTag::Str, TypeTag::INT, TypeTag::INT],
            TypeTag::Str,
            |args| {
                let s = as_str(&args[0])?;
                let (o, l) = (as_int(&args[1])?, as_int(&args[2])?);
                let n = s.chars().count() as i64;
                if o < 0 || l < 0 || o + l > n {
                    return Err(format!("substring [{o}, {o}+{l}) outside string of length {n}"));
                }
                Ok(Value::Str(s.chars().skip(o as usize).take(l as usize).collect()))
            },
        ),
        FunctionDef::new("sumlen", vec![TypeTag::StrArray], TypeTag::INT, |args| match &args[0] {
            Value::StrArray(a) => Ok(Value::Int(a.iter().map(|s| s.chars().count() as i64).sum())),
            other => Err(format!("expected string[], found {}", other.kind())),
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substr_bounds() {
        let mut r = FunctionRegistry::new();
        assert!(r.enable("strings"));
        let f = r.get("substr").unwrap();
        let s = |x: &str| Value::Str(x.into());
        assert_eq!(f.call(&[s("abab"), Value::Int(2), Value::Int(2)]), Ok(s("ab")));
        assert_eq!(f.call(&[s("ab"), Value::Int(0), Value::Int(0)]), Ok(s("")));
        assert!(f.call(&[s("ab"), Value::Int(1), Value::Int(2)]).is_err());
        assert!(!r.enable("nope"));
    }
}
