use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::RowRef;
use crate::model::{Expr, Operation};
use crate::trace::GeneralizedTrace;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NamingConflict {
    /// One expression map carries several names.
    SameMapTwoNames { names: Vec<String>, rows: Vec<RowRef> },
    /// One name covers several expression maps.
    SameNameTwoMaps { name: String, rows: Vec<RowRef> },
}

/// Named operations in order of first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OperationTable {
    pub operations: Vec<Operation>,
    pub conflicts: Vec<NamingConflict>,
    /// Where each operation occurs.
    pub rows: BTreeMap<String, Vec<RowRef>>,
}

impl OperationTable {
    pub fn get(&self, name: &str) -> Option<&Operation> {
        self.operations.iter().find(|o| o.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.operations.iter().map(|o| o.name.as_str()).collect()
    }
}

type Map = BTreeMap<String, Expr>;

/// Group rows by their expression maps. Rows without a name take the name of
/// an equal map named elsewhere, or a fresh `OPn`; named rows without
/// expressions take the map given for that name elsewhere.
pub fn collect_operations(gts: &[GeneralizedTrace]) -> OperationTable {
    let entries: Vec<(Option<&str>, &Map, RowRef)> = gts
        .iter()
        .enumerate()
        .flat_map(|(t, gt)| {
            gt.rows.iter().enumerate().map(move |(r, row)| (row.op.as_deref(), &row.exprs, RowRef { trace: t, row: r + 1 }))
        })
        .collect();
    // A named row without expressions refers to the operation defined under
    // that name elsewhere.
    let entries: Vec<(Option<&str>, &Map, RowRef)> = entries
        .iter()
        .map(|&(name, map, at)| match name {
            Some(n) if map.is_empty() => {
                let def = entries.iter().find(|e| e.0 == Some(n) && !e.1.is_empty()).map_or(map, |e| e.1);
                (name, def, at)
            }
            _ => (name, map, at),
        })
        .collect();
    let mut used: BTreeSet<String> = entries.iter().filter_map(|e| e.0.map(str::to_string)).collect();
    let mut auto: Vec<(&Map, String)> = Vec::new();
    let mut fresh = 0;
    let mut resolved: Vec<(String, &Map, RowRef)> = Vec::with_capacity(entries.len());
    for &(name, map, at) in &entries {
        let name = match name {
            Some(n) => n.to_string(),
            None => match entries.iter().find(|e| e.0.is_some() && e.1 == map) {
                Some(e) => e.0.unwrap().to_string(),
                None => match auto.iter().find(|a| a.0 == map) {
                    Some(a) => a.1.clone(),
                    None => {
                        let n = loop {
                            fresh += 1;
                            let n = format!("OP{fresh}");
                            if !used.contains(&n) {
                                break n;
                            }
                        };
                        used.insert(n.clone());
                        auto.push((map, n.clone()));
                        n
                    }
                },
            },
        };
        resolved.push((name, map, at));
    }

    let mut table = OperationTable::default();
    for (name, map, at) in &resolved {
        table.rows.entry(name.clone()).or_default().push(*at);
        if table.get(name).is_none() {
            table.operations.push(Operation { name: name.clone(), assignments: (*map).clone() });
        }
    }
    for op in &table.operations {
        let mut maps: Vec<&Map> = Vec::new();
        for e in resolved.iter().filter(|e| e.0 == op.name) {
            if !maps.contains(&e.1) {
                maps.push(e.1);
            }
        }
        if maps.len() > 1 {
            table.conflicts.push(NamingConflict::SameNameTwoMaps {
                name: op.name.clone(),
                rows: table.rows[&op.name].clone(),
            });
        }
    }
    let mut seen: Vec<&Map> = Vec::new();
    for (_, map, _) in &resolved {
        if seen.contains(map) {
            continue;
        }
        seen.push(map);
        let mut names: Vec<String> = Vec::new();
        let mut rows = Vec::new();
        for e in resolved.iter().filter(|e| e.1 == *map) {
            if !names.contains(&e.0) {
                names.push(e.0.clone());
            }
            rows.push(e.2);
        }
        if names.len() > 1 {
            table.conflicts.push(NamingConflict::SameMapTwoNames { names, rows });
        }
    }
    table
}
