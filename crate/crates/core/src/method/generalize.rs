use serde::Serialize;

use crate::model::{Model, Value};
use crate::trace::GeneralizedTrace;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellCheck {
    /// 1-based row index.
    pub row: usize,
    pub var: String,
    /// The literal in the table, `.` if the cell is blank.
    pub literal: String,
    /// Value of the expression or the evaluation error.
    pub computed: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneralizationReport {
    pub cells: Vec<CellCheck>,
    /// Cells with a literal but no expression.
    pub unexplained: Vec<(usize, String)>,
}

impl GeneralizationReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &CellCheck> {
        self.cells.iter().filter(|c| !c.ok)
    }

    pub fn ok(&self) -> bool {
        self.mismatches().next().is_none()
    }
}

/// Evaluate every cell expression against the state after the previous row
/// and compare with the literal.
pub fn verify_generalization(model: &Model, gt: &GeneralizedTrace) -> GeneralizationReport {
    let states = gt.states(model);
    let mut cells = Vec::new();
    let mut unexplained = Vec::new();
    for (i, row) in gt.rows.iter().enumerate() {
        let before = &states[i];
        for (var, e) in &row.exprs {
            let literal = row.values.get(var).cloned().unwrap_or(Value::Undefined);
            let (computed, ok) = match model.eval(before, e) {
                Ok(v) => {
                    let v = match model.var_index(var) {
                        Some(k) => model.variables()[k].ty.coerce(v),
                        None => v,
                    };
                    let ok = v == literal;
                    (v.to_string(), ok)
                }
                Err(err) => (format!("error: {err}"), false),
            };
            cells.push(CellCheck { row: i + 1, var: var.clone(), literal: literal.to_string(), computed, ok });
        }
        for var in row.values.keys() {
            if !row.exprs.contains_key(var) {
                unexplained.push((i + 1, var.clone()));
            }
        }
    }
    GeneralizationReport { cells, unexplained }
}
