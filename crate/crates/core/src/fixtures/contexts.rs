//! A counter incremented in two situations. Without a state variable the
//! two `i <- i + 1` rows share an operation but need different successors,
//! so coloring by operation name fails. Tagging each increment with
//! `s <- #A` or `s <- #B` separates them.
//!
//! Trace X starts with `j = 1`: CLR, INC, STEP. Trace Y starts with
//! `j = 0`: INC, DONE. Both INC rows end in the same predicate word.

use crate::model::{MachineState, Model, TypeTag, Value};
use crate::trace::ExtendedTrace;

pub fn model(with_state_variable: bool) -> Model {
    let mut b = Model::builder()
        .variable("i", TypeTag::INT)
        .variable("j", TypeTag::INT)
        .variable("r", TypeTag::Bool);
    if with_state_variable {
        b = b
            .variable("s", TypeTag::Enum(vec!["A".into(), "B".into()]))
            .operation("INC_A", &[("i", "i + 1"), ("s", "#A")])
            .operation("INC_B", &[("i", "i + 1"), ("s", "#B")]);
    } else {
        b = b.operation("INC", &[("i", "i + 1")]);
    }
    b.operation("CLR", &[("j", "0")])
        .operation("STEP", &[("j", "j + 1")])
        .operation("DONE", &[("r", "true")])
        .predicate("Z", "j = 0")
        .build()
        .expect("contexts model is well-formed")
}

fn trace(model: &Model, j: i64, ops: &[&str]) -> ExtendedTrace {
    let mut s = model.state(&[("i", Value::Int(0)), ("j", Value::Int(j))]).expect("valid input");
    let mut states: Vec<MachineState> = vec![s.clone()];
    for op in ops {
        s = model.apply_named(&s, op).expect("operation applies");
        states.push(s.clone());
    }
    ExtendedTrace::new(states, ops.iter().map(|o| o.to_string()).collect())
}

pub fn traces(with_state_variable: bool) -> Vec<ExtendedTrace> {
    let m = model(with_state_variable);
    let (a, b) = if with_state_variable { ("INC_A", "INC_B") } else { ("INC", "INC") };
    vec![trace(&m, 1, &["CLR", a, "STEP"]), trace(&m, 0, &[b, "DONE"])]
}

/// Operations that increment `i`.
pub fn increments(model: &Model) -> Vec<&str> {
    model
        .operations()
        .iter()
        .filter(|o| o.assignments.get("i").map(|e| e.to_string()) == Some("i + 1".into()))
        .map(|o| o.name.as_str())
        .collect()
}
