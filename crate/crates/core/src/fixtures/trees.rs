//! Rooted ordered trees and the tree primitives used by the Lindell fixture.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value as Json;
use thiserror::Error;

use crate::model::{FunctionDef, TypeTag, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("invalid node {0}")]
    InvalidNode(i64),
    #[error("node {0} has no {1}")]
    Missing(i64, &'static str),
    #[error("malformed tree: {0}")]
    Malformed(String),
}

/// Rooted ordered tree with integer node ids. Child order is the given order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeValue {
    ids: Vec<i64>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    size: Vec<usize>,
    index: BTreeMap<i64, usize>,
}

impl fmt::Debug for TreeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl TreeValue {
    fn empty() -> Self {
        TreeValue {
            ids: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            size: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    fn add(&mut self, id: i64, parent: Option<usize>) -> Result<usize, TreeError> {
        let i = self.ids.len();
        if self.index.insert(id, i).is_some() {
            return Err(TreeError::Malformed(format!("duplicate node id {id}")));
        }
        self.ids.push(id);
        self.parent.push(parent);
        self.children.push(Vec::new());
        self.size.push(1);
        if let Some(p) = parent {
            self.children[p].push(i);
        }
        Ok(i)
    }

    fn finish(mut self) -> Self {
        // nodes are added in preorder, so children come after parents
        for i in (0..self.ids.len()).rev() {
            if let Some(p) = self.parent[i] {
                self.size[p] += self.size[i];
            }
        }
        self
    }

    /// Parse the nested form `[id, child, child, ...]`, each child again nested.
    pub fn from_json(j: &Json) -> Result<TreeValue, String> {
        fn go(t: &mut TreeValue, j: &Json, parent: Option<usize>) -> Result<(), String> {
            let items = j.as_array().filter(|a| !a.is_empty()).ok_or_else(|| {
                format!("tree node must be a non-empty array [id, children...], found {j}")
            })?;
            let id = items[0].as_i64().ok_or_else(|| format!("node id must be an integer: {}", items[0]))?;
            let me = t.add(id, parent).map_err(|e| e.to_string())?;
            for c in &items[1..] {
                go(t, c, Some(me))?;
            }
            Ok(())
        }
        let mut t = TreeValue::empty();
        go(&mut t, j, None)?;
        Ok(t.finish())
    }

    pub fn to_json(&self) -> Json {
        fn go(t: &TreeValue, i: usize) -> Json {
            let mut items = vec![Json::from(t.ids[i])];
            items.extend(t.children[i].iter().map(|&c| go(t, c)));
            Json::Array(items)
        }
        go(self, 0)
    }

    /// Build from a balanced-parenthesis shape such as `(()(()))`, numbering
    /// nodes 1, 2, ... in preorder.
    pub fn from_shape(shape: &str) -> Result<TreeValue, TreeError> {
        let mut t = TreeValue::empty();
        let mut stack: Vec<usize> = Vec::new();
        let mut closed_root = false;
        for c in shape.chars().filter(|c| !c.is_whitespace()) {
            match c {
                '(' => {
                    if closed_root {
                        return Err(TreeError::Malformed("more than one root".into()));
                    }
                    let id = t.ids.len() as i64 + 1;
                    let me = t.add(id, stack.last().copied())?;
                    stack.push(me);
                }
                ')' => {
                    stack.pop().ok_or_else(|| TreeError::Malformed("unbalanced `)`".into()))?;
                    closed_root = stack.is_empty();
                }
                _ => return Err(TreeError::Malformed(format!("unexpected `{c}`"))),
            }
        }
        if !closed_root {
            return Err(TreeError::Malformed("unbalanced or empty shape".into()));
        }
        Ok(t.finish())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn idx(&self, id: i64) -> Result<usize, TreeError> {
        self.index.get(&id).copied().ok_or(TreeError::InvalidNode(id))
    }

    pub fn root(&self) -> i64 {
        self.ids[0]
    }

    pub fn node_ids(&self) -> &[i64] {
        &self.ids
    }

    pub fn parent(&self, v: i64) -> Result<i64, TreeError> {
        let i = self.idx(v)?;
        self.parent[i].map(|p| self.ids[p]).ok_or(TreeError::Missing(v, "parent"))
    }

    pub fn children(&self, v: i64) -> Result<Vec<i64>, TreeError> {
        Ok(self.children[self.idx(v)?].iter().map(|&c| self.ids[c]).collect())
    }

    pub fn first_child(&self, v: i64) -> Result<i64, TreeError> {
        let i = self.idx(v)?;
        self.children[i].first().map(|&c| self.ids[c]).ok_or(TreeError::Missing(v, "child"))
    }

    pub fn next_sibling(&self, v: i64) -> Result<i64, TreeError> {
        let i = self.idx(v)?;
        let p = self.parent[i].ok_or(TreeError::Missing(v, "next sibling"))?;
        let sibs = &self.children[p];
        let pos = sibs.iter().position(|&c| c == i).unwrap();
        sibs.get(pos + 1).map(|&c| self.ids[c]).ok_or(TreeError::Missing(v, "next sibling"))
    }

    pub fn size(&self, v: i64) -> Result<usize, TreeError> {
        Ok(self.size[self.idx(v)?])
    }

    pub fn is_root(&self, v: i64) -> Result<bool, TreeError> {
        Ok(self.parent[self.idx(v)?].is_none())
    }

    fn child_sizes(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.children[i].iter().map(|&c| self.size[c])
    }

    /// Smallest child-subtree size strictly greater than `k`.
    pub fn next_block_size(&self, v: i64, k: i64) -> Result<i64, TreeError> {
        let i = self.idx(v)?;
        self.child_sizes(i)
            .map(|s| s as i64)
            .filter(|&s| s > k)
            .min()
            .ok_or(TreeError::Missing(v, "block above the current size"))
    }

    pub fn has_block_above(&self, v: i64, k: i64) -> Result<bool, TreeError> {
        let i = self.idx(v)?;
        Ok(self.child_sizes(i).any(|s| s as i64 > k))
    }

    /// Cardinality of the block B(k) of `v`.
    pub fn block_card(&self, v: i64, k: i64) -> Result<i64, TreeError> {
        let i = self.idx(v)?;
        Ok(self.child_sizes(i).filter(|&s| s as i64 == k).count() as i64)
    }

    /// First child of `v` (in child order) whose subtree has size `k`.
    pub fn first_in_block(&self, v: i64, k: i64) -> Result<i64, TreeError> {
        let i = self.idx(v)?;
        self.children[i]
            .iter()
            .find(|&&c| self.size[c] as i64 == k)
            .map(|&c| self.ids[c])
            .ok_or(TreeError::Missing(v, "child in the requested block"))
    }

    fn later_in_block(&self, v: i64) -> Result<Option<i64>, TreeError> {
        let i = self.idx(v)?;
        let p = match self.parent[i] {
            Some(p) => p,
            None => return Ok(None),
        };
        let sibs = &self.children[p];
        let pos = sibs.iter().position(|&c| c == i).unwrap();
        Ok(sibs[pos + 1..].iter().find(|&&c| self.size[c] == self.size[i]).map(|&c| self.ids[c]))
    }

    /// Next sibling after `v` in the same block.
    pub fn next_in_block(&self, v: i64) -> Result<i64, TreeError> {
        self.later_in_block(v)?.ok_or(TreeError::Missing(v, "next node in its block"))
    }

    pub fn is_last_in_block(&self, v: i64) -> Result<bool, TreeError> {
        Ok(self.later_in_block(v)?.is_none())
    }

    /// Whether `v` is the only child of its parent with its subtree size
    /// (false at the root).
    pub fn in_singleton_block(&self, v: i64) -> Result<bool, TreeError> {
        let i = self.idx(v)?;
        Ok(match self.parent[i] {
            None => false,
            Some(p) => self.child_sizes(p).filter(|&s| s == self.size[i]).count() == 1,
        })
    }

    /// Children-subtree sizes in ascending order (the block signature as a tuple).
    pub fn block_signature(&self, v: i64) -> Result<Vec<usize>, TreeError> {
        let i = self.idx(v)?;
        let mut s: Vec<usize> = self.child_sizes(i).collect();
        s.sort_unstable();
        Ok(s)
    }
}

/// Compare two multisets of sizes by their ascending tuples, lexicographically.
pub fn compare_multisets(a: &[usize], b: &[usize]) -> Ordering {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a.cmp(&b)
}

/// The coarse order on subtrees: size, then number of children, then block signature.
pub fn cmp1(s: &TreeValue, sv: i64, t: &TreeValue, tv: i64) -> Result<Ordering, TreeError> {
    Ok(s.size(sv)?
        .cmp(&t.size(tv)?)
        .then(s.children(sv)?.len().cmp(&t.children(tv)?.len()))
        .then(compare_multisets(&s.block_signature(sv)?, &t.block_signature(tv)?)))
}

pub const CMP_LABELS: [&str; 3] = ["lt", "iso", "gt"];

fn ordering_label(o: Ordering) -> &'static str {
    match o {
        Ordering::Less => "lt",
        Ordering::Equal => "iso",
        Ordering::Greater => "gt",
    }
}

fn tree(v: &Value) -> Result<&TreeValue, String> {
    match v {
        Value::Tree(t) => Ok(t),
        other => Err(format!("expected tree, found {}", other.kind())),
    }
}

fn node(v: &Value) -> Result<i64, String> {
    match v {
        Value::Node(n) => Ok(*n),
        other => Err(format!("expected node, found {}", other.kind())),
    }
}

fn int(v: &Value) -> Result<i64, String> {
    match v {
        Value::Int(n) => Ok(*n),
        other => Err(format!("expected int, found {}", other.kind())),
    }
}

fn unary(
    name: &str,
    result: TypeTag,
    f: impl Fn(&TreeValue, i64) -> Result<Value, TreeError> + Send + Sync + 'static,
) -> FunctionDef {
    FunctionDef::new(name, vec![TypeTag::Tree, TypeTag::Node], result, move |a| {
        f(tree(&a[0])?, node(&a[1])?).map_err(|e| e.to_string())
    })
}

fn with_size(
    name: &str,
    result: TypeTag,
    f: impl Fn(&TreeValue, i64, i64) -> Result<Value, TreeError> + Send + Sync + 'static,
) -> FunctionDef {
    FunctionDef::new(name, vec![TypeTag::Tree, TypeTag::Node, TypeTag::INT], result, move |a| {
        f(tree(&a[0])?, node(&a[1])?, int(&a[2])?).map_err(|e| e.to_string())
    })
}

/// The `trees` builtin group.
pub fn tree_builtins() -> Vec<FunctionDef> {
    let cmp_type = TypeTag::Enum(CMP_LABELS.iter().map(|s| s.to_string()).collect());
    vec![
        FunctionDef::new("root", vec![TypeTag::Tree], TypeTag::Node, |a| {
            Ok(Value::Node(tree(&a[0])?.root()))
        }),
        unary("parent", TypeTag::Node, |t, v| t.parent(v).map(Value::Node)),
        unary("first_child", TypeTag::Node, |t, v| t.first_child(v).map(Value::Node)),
        unary("next_sibling", TypeTag::Node, |t, v| t.next_sibling(v).map(Value::Node)),
        unary("size", TypeTag::INT, |t, v| t.size(v).map(|n| Value::Int(n as i64))),
        unary("num_children", TypeTag::INT, |t, v| {
            t.children(v).map(|c| Value::Int(c.len() as i64))
        }),
        unary("is_root", TypeTag::Bool, |t, v| t.is_root(v).map(Value::Bool)),
        unary("next_in_block", TypeTag::Node, |t, v| t.next_in_block(v).map(Value::Node)),
        unary("is_last_in_block", TypeTag::Bool, |t, v| t.is_last_in_block(v).map(Value::Bool)),
        unary("in_singleton_block", TypeTag::Bool, |t, v| {
            t.in_singleton_block(v).map(Value::Bool)
        }),
        with_size("next_block_size", TypeTag::INT, |t, v, k| {
            t.next_block_size(v, k).map(Value::Int)
        }),
        with_size("has_block_above", TypeTag::Bool, |t, v, k| {
            t.has_block_above(v, k).map(Value::Bool)
        }),
        with_size("block_card", TypeTag::INT, |t, v, k| t.block_card(v, k).map(Value::Int)),
        with_size("first_in_block", TypeTag::Node, |t, v, k| {
            t.first_in_block(v, k).map(Value::Node)
        }),
        FunctionDef::new(
            "cmp1",
            vec![TypeTag::Tree, TypeTag::Node, TypeTag::Tree, TypeTag::Node],
            cmp_type,
            |a| {
                let o = cmp1(tree(&a[0])?, node(&a[1])?, tree(&a[2])?, node(&a[3])?)
                    .map_err(|e| e.to_string())?;
                Ok(Value::Enum(ordering_label(o).to_string()))
            },
        ),
    ]
}
