//! The worked examples: the cm2 doubling program, the common-string-model
//! (CSM) comparison of two string lists, and Lindell's tree isomorphism
//! algorithm. Each fixture is a set of embedded JSON files in the same
//! formats the CLI reads.

pub mod contexts;
pub mod trees;

use thiserror::Error;

use crate::method::DecisionTree;
use crate::model::Model;
use crate::program::Program;
use crate::trace::GeneralizedTrace;

pub const FIXTURE_NAMES: [&str; 3] = ["cm2_double", "csm", "lindell"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown fixture `{0}` (expected one of cm2_double, csm, lindell)")]
pub struct UnknownFixture(pub String);

type Files = &'static [(&'static str, &'static str)];

struct Source {
    name: &'static str,
    model: &'static str,
    program: &'static str,
    traces: Files,
    extras: Files,
}

macro_rules! file {
    ($dir:literal, $name:literal) => {
        ($name, include_str!(concat!("../../fixtures/", $dir, "/", $name)))
    };
}

static SOURCES: [Source; 3] = [
    Source {
        name: "cm2_double",
        model: include_str!("../../fixtures/cm2_double/model.json"),
        program: include_str!("../../fixtures/cm2_double/program.json"),
        traces: &[file!("cm2_double", "trace-2-1.json")],
        extras: &[file!("cm2_double", "program-progeq.json")],
    },
    Source {
        name: "csm",
        model: include_str!("../../fixtures/csm/model.json"),
        program: include_str!("../../fixtures/csm/program.json"),
        traces: &[
            file!("csm", "table2.json"),
            file!("csm", "table3.json"),
            file!("csm", "table4.json"),
            file!("csm", "table5.json"),
        ],
        extras: &[],
    },
    Source {
        name: "lindell",
        model: include_str!("../../fixtures/lindell/model.json"),
        program: include_str!("../../fixtures/lindell/program.json"),
        traces: &[file!("lindell", "table8.json"), file!("lindell", "table9.json")],
        extras: &[file!("lindell", "ret2-decision-tree.json")],
    },
];

/// A loaded fixture. Traces keep their file names.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub model: Model,
    pub program: Program,
    pub traces: Vec<(&'static str, GeneralizedTrace)>,
    source: &'static Source,
}

impl std::fmt::Debug for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name)
    }
}

impl Fixture {
    /// Every file of the fixture as `(file name, contents)`: model, program,
    /// traces, then extras.
    pub fn files(&self) -> Vec<(&'static str, &'static str)> {
        let s = self.source;
        let mut out = vec![("model.json", s.model), ("program.json", s.program)];
        out.extend_from_slice(s.traces);
        out.extend_from_slice(s.extras);
        out
    }

    pub fn file(&self, name: &str) -> Option<&'static str> {
        self.files().into_iter().find(|f| f.0 == name).map(|f| f.1)
    }

    pub fn trace(&self, name: &str) -> Option<&GeneralizedTrace> {
        self.traces.iter().find(|t| t.0 == name).map(|t| &t.1)
    }

    pub fn trace_list(&self) -> Vec<GeneralizedTrace> {
        self.traces.iter().map(|t| t.1.clone()).collect()
    }

    /// The doubling program with an extra `R1-1` state (cm2_double only).
    pub fn progeq(&self) -> Option<Program> {
        self.file("program-progeq.json").map(|s| Program::from_json_str(s).expect("embedded program is valid"))
    }

    /// The decision tree for RET2 (lindell only).
    pub fn decision_tree(&self) -> Option<DecisionTree> {
        self.file("ret2-decision-tree.json")
            .map(|s| DecisionTree::from_json_str(s).expect("embedded decision tree is valid"))
    }
}

pub fn fixture(name: &str) -> Result<Fixture, UnknownFixture> {
    let source = SOURCES.iter().find(|s| s.name == name).ok_or_else(|| UnknownFixture(name.to_string()))?;
    let model = Model::from_json_str(source.model).expect("embedded model is valid");
    let program = Program::from_json_str(source.program).expect("embedded program is valid");
    let traces = source
        .traces
        .iter()
        .map(|(n, src)| (*n, GeneralizedTrace::from_json_str(&model, src).expect("embedded trace is valid")))
        .collect();
    Ok(Fixture { name: source.name, model, program, traces, source })
}
