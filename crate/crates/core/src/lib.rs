//! Trace-based programming: models of computation, control-flow programs,
//! traces, program synthesis from traces, and tooling for the step-by-step
//! method of turning example runs into a program.

pub mod export;
pub mod fixtures;
pub mod io;
pub mod method;
pub mod model;
pub mod program;
pub mod synthesis;
pub mod trace;
