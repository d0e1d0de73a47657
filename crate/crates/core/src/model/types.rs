use std::fmt;
use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value as Json;

use crate::fixtures::trees::TreeValue;

/// Type of a model variable or expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeTag {
    /// Integer; with a floor, assignments below it saturate (`nat` has floor 0).
    Int { floor: Option<i64> },
    Bool,
    Str,
    StrArray,
    Enum(Vec<String>),
    Node,
    Tree,
    /// Stack of fixed-width rows.
    Stack(Vec<TypeTag>),
}

impl TypeTag {
    pub const INT: TypeTag = TypeTag::Int { floor: None };
    pub const NAT: TypeTag = TypeTag::Int { floor: Some(0) };

    pub fn is_int(&self) -> bool {
        matches!(self, TypeTag::Int { .. })
    }

    /// Whether a value of type `other` may be stored in a slot of this type.
    pub fn accepts(&self, other: &TypeTag) -> bool {
        match (self, other) {
            (TypeTag::Int { .. }, TypeTag::Int { .. }) => true,
            (TypeTag::Enum(a), TypeTag::Enum(b)) => b.iter().all(|l| a.contains(l)),
            (TypeTag::Stack(a), TypeTag::Stack(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.accepts(y))
            }
            _ => self == other,
        }
    }

    /// Whether `v` is a well-formed inhabitant of this type (⊥ inhabits every type).
    pub fn admits(&self, v: &Value) -> bool {
        match (self, v) {
            (_, Value::Undefined) => true,
            (TypeTag::Int { floor }, Value::Int(n)) => floor.map_or(true, |f| *n >= f),
            (TypeTag::Bool, Value::Bool(_)) => true,
            (TypeTag::Str, Value::Str(_)) => true,
            (TypeTag::StrArray, Value::StrArray(_)) => true,
            (TypeTag::Enum(labels), Value::Enum(l)) => labels.contains(l),
            (TypeTag::Node, Value::Node(_)) => true,
            (TypeTag::Tree, Value::Tree(_)) => true,
            (TypeTag::Stack(row), Value::Stack(rows)) => rows
                .iter()
                .all(|r| r.len() == row.len() && row.iter().zip(r).all(|(t, x)| t.admits(x))),
            _ => false,
        }
    }

    /// Coerce a freshly computed value for storage: saturate at the floor.
    pub fn coerce(&self, v: Value) -> Value {
        match (self, v) {
            (TypeTag::Int { floor: Some(f) }, Value::Int(n)) if n < *f => Value::Int(*f),
            (_, v) => v,
        }
    }

    fn to_json(&self) -> Json {
        match self {
            TypeTag::Int { floor: None } => Json::from("int"),
            TypeTag::Int { floor: Some(0) } => Json::from("nat"),
            TypeTag::Int { floor: Some(f) } => serde_json::json!({ "int": { "floor": f } }),
            TypeTag::Bool => Json::from("bool"),
            TypeTag::Str => Json::from("string"),
            TypeTag::StrArray => Json::from("string[]"),
            TypeTag::Node => Json::from("node"),
            TypeTag::Tree => Json::from("tree"),
            TypeTag::Enum(labels) => serde_json::json!({ "enum": labels }),
            TypeTag::Stack(row) => {
                serde_json::json!({ "stack": row.iter().map(TypeTag::to_json).collect::<Vec<_>>() })
            }
        }
    }

    fn from_json(j: &Json) -> Result<TypeTag, String> {
        match j {
            Json::String(s) => match s.as_str() {
                "int" => Ok(TypeTag::INT),
                "nat" => Ok(TypeTag::NAT),
                "bool" => Ok(TypeTag::Bool),
                "string" => Ok(TypeTag::Str),
                "string[]" => Ok(TypeTag::StrArray),
                "node" => Ok(TypeTag::Node),
                "tree" => Ok(TypeTag::Tree),
                other => Err(format!("unknown type `{other}`")),
            },
            Json::Object(m) if m.len() == 1 => {
                let (k, v) = m.iter().next().unwrap();
                match k.as_str() {
                    "enum" => {
                        let labels: Vec<String> =
                            serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
                        if labels.is_empty() {
                            return Err("enum type needs at least one label".into());
                        }
                        Ok(TypeTag::Enum(labels))
                    }
                    "stack" => {
                        let row = v.as_array().ok_or("stack type expects a list of row types")?;
                        Ok(TypeTag::Stack(
                            row.iter().map(TypeTag::from_json).collect::<Result<_, _>>()?,
                        ))
                    }
                    "int" => {
                        let floor = v
                            .get("floor")
                            .and_then(Json::as_i64)
                            .ok_or("int type expects {\"floor\": n}")?;
                        Ok(TypeTag::Int { floor: Some(floor) })
                    }
                    other => Err(format!("unknown type constructor `{other}`")),
                }
            }
            _ => Err(format!("malformed type {j}")),
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTag::Int { floor: None } => write!(f, "int"),
            TypeTag::Int { floor: Some(0) } => write!(f, "nat"),
            TypeTag::Int { floor: Some(n) } => write!(f, "int(>={n})"),
            TypeTag::Bool => write!(f, "bool"),
            TypeTag::Str => write!(f, "string"),
            TypeTag::StrArray => write!(f, "string[]"),
            TypeTag::Node => write!(f, "node"),
            TypeTag::Tree => write!(f, "tree"),
            TypeTag::Enum(l) => write!(f, "enum{{{}}}", l.join(",")),
            TypeTag::Stack(row) => {
                let parts: Vec<String> = row.iter().map(|t| t.to_string()).collect();
                write!(f, "stack({})", parts.join(","))
            }
        }
    }
}

impl Serialize for TypeTag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TypeTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = Json::deserialize(d)?;
        TypeTag::from_json(&j).map_err(D::Error::custom)
    }
}

/// A runtime value. `Undefined` marks a variable that has not been assigned yet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Undefined,
    Int(i64),
    Bool(bool),
    Str(String),
    StrArray(Vec<String>),
    Enum(String),
    Node(i64),
    Stack(Vec<Vec<Value>>),
    Tree(Arc<TreeValue>),
}

impl Value {
    pub fn is_undefined(&self) -> bool {
        matches!(self, Value::Undefined)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Undefined => "undefined",
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Str(_) => "string",
            Value::StrArray(_) => "string[]",
            Value::Enum(_) => "enum",
            Value::Node(_) => "node",
            Value::Stack(_) => "stack",
            Value::Tree(_) => "tree",
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Undefined => Json::Null,
            Value::Int(n) | Value::Node(n) => Json::from(*n),
            Value::Bool(b) => Json::from(*b),
            Value::Str(s) | Value::Enum(s) => Json::from(s.as_str()),
            Value::StrArray(v) => Json::from(v.clone()),
            Value::Stack(rows) => Json::Array(
                rows.iter()
                    .map(|r| Json::Array(r.iter().map(Value::to_json).collect()))
                    .collect(),
            ),
            Value::Tree(t) => t.to_json(),
        }
    }

    /// Decode a JSON value against the expected type; `null` decodes to `Undefined`.
    pub fn from_json(ty: &TypeTag, j: &Json) -> Result<Value, String> {
        if j.is_null() {
            return Ok(Value::Undefined);
        }
        let bad = || format!("expected {ty}, found {j}");
        let v = match ty {
            TypeTag::Int { .. } => Value::Int(j.as_i64().ok_or_else(bad)?),
            TypeTag::Node => Value::Node(j.as_i64().ok_or_else(bad)?),
            TypeTag::Bool => Value::Bool(j.as_bool().ok_or_else(bad)?),
            TypeTag::Str => Value::Str(j.as_str().ok_or_else(bad)?.to_string()),
            TypeTag::StrArray => Value::StrArray(
                serde_json::from_value::<Vec<String>>(j.clone()).map_err(|_| bad())?,
            ),
            TypeTag::Enum(_) => Value::Enum(j.as_str().ok_or_else(bad)?.to_string()),
            TypeTag::Tree => Value::Tree(Arc::new(TreeValue::from_json(j)?)),
            TypeTag::Stack(row) => {
                let rows = j.as_array().ok_or_else(bad)?;
                let mut out = Vec::with_capacity(rows.len());
                for r in rows {
                    let cells = r.as_array().filter(|c| c.len() == row.len()).ok_or_else(bad)?;
                    out.push(
                        row.iter()
                            .zip(cells)
                            .map(|(t, c)| Value::from_json(t, c))
                            .collect::<Result<Vec<_>, _>>()?,
                    );
                }
                Value::Stack(out)
            }
        };
        if ty.admits(&v) {
            Ok(v)
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Undefined => write!(f, "."),
            Value::Int(n) | Value::Node(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Enum(s) => write!(f, "#{s}"),
            Value::StrArray(v) => write!(f, "[{}]", v.join(",")),
            Value::Stack(rows) => {
                write!(f, "[")?;
                for (i, r) in rows.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    let cells: Vec<String> = r.iter().map(|c| c.to_string()).collect();
                    write!(f, "({})", cells.join(","))?;
                }
                write!(f, "]")
            }
            Value::Tree(t) => write!(f, "{}", t.to_json()),
        }
    }
}
