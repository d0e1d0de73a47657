mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracesynth::fixtures::{contexts, fixture};
use tracesynth::program::{run, DEFAULT_FUEL};
use tracesynth::synthesis::*;
use tracesynth::trace::ExtendedTrace;

fn fig1_trace() -> ExtendedTrace {
    walk(&cm2(), s(2, 1), &["R2-1", "R1-1", "R2+1", "R2+1", "R1-1", "R2+1", "R2+1"])
}

#[test]
fn umatrix_of_fig1_trace_against_itself() {
    let m = cm2();
    let x = fig1_trace();
    let u = umatrix(&m, &x, &x);
    // Words (R1=0, R2=0): lines 3,4 are 00 and lines 6,7 are 10.
    assert!(u.get(3, 4), "y1 and y2 lines: equal words, successors R2+1 vs R1-1");
    assert!(u.get(6, 7), "line 7 is last, line 6 is not");
    for (i, j) in [(3, 6), (4, 7), (3, 7), (2, 5), (4, 6)] {
        assert!(!u.get(i, j), "({i},{j}) differ in words, so mergeable");
    }
    for i in 0..=7 {
        assert!(!u.get(i, i));
    }
    for j in 1..=7 {
        assert!(u.get(0, j) && u.get(j, 0));
    }
    assert!(u.get(8, 3) && u.get(3, 8) && !u.get(8, 8));
}

#[test]
fn umatrix_matches_recursive_definition() {
    let m = cm2();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let ts = random_trace_set(&mut rng, 12);
        for x in &ts {
            for y in &ts {
                let u = umatrix(&m, x, y);
                for i in 0..=x.len() {
                    for j in 0..=y.len() {
                        assert_eq!(u.get(i, j), oracle_unmergeable(&m, x, i, y, j));
                    }
                }
            }
        }
    }
}

#[test]
fn trace_graph_shapes() {
    let m = cm2();
    let g = trace_graph(&m, &[walk(&m, s(0, 0), &[])]);
    assert_eq!((g.len(), g.edges().len()), (1, 0));

    // Disjoint operation alphabets: every pair of non-start lines across the
    // traces is adjacent.
    let x = walk(&m, s(1, 1), &["R1+1", "R1+1"]);
    let y = walk(&m, s(0, 0), &["R2+1", "R2+1"]);
    let g = trace_graph(&m, &[x, y]);
    for i in 1..=2 {
        for j in 1..=2 {
            assert!(g.adjacent(g.vertex(0, i), g.vertex(1, j)));
        }
    }
    assert!(!g.adjacent(g.vertex(0, 0), g.vertex(1, 0)));
}

#[test]
fn restricted_coloring_lower_bound_and_injective_upper_bound() {
    let m = cm2();
    let ts = vec![fig1_trace(), walk(&m, s(0, 3), &[]), walk(&m, s(1, 0), &["R1-1", "R2+1", "R2+1"])];
    let g = trace_graph(&m, &ts);
    assert!(restricted_coloring(&g, g.distinct_ops()).is_none());
    let c = restricted_coloring(&g, g.len()).unwrap();
    assert!(coloring_faults(&g, &c).is_empty());
    let injective = Coloring((0..g.len()).map(|v| if g.start_vertices().contains(&v) { 0 } else { v + 1 }).collect());
    assert!(coloring_faults(&g, &injective).is_empty());
}

#[test]
fn fig1_traces_give_a_program_equivalent_to_fig1() {
    let f = fixture("cm2_double").unwrap();
    let m = &f.model;
    let inputs = [s(2, 1), s(0, 3), s(1, 0)];
    let ts: Vec<ExtendedTrace> = inputs
        .iter()
        .map(|i| {
            let r = run(m, &f.program, i, None, DEFAULT_FUEL);
            ExtendedTrace::new(r.trace, r.ops)
        })
        .collect();
    let h = heuristic_coloring(m, &ts);
    assert!(!h.ok(), "y1 and y2 share R2+1 but need different successors");
    let (p, k) = minimal_program(m, &ts).unwrap();
    assert_eq!(k, 5);
    assert_eq!(p.states().len(), 5);
    let eq = tracesynth::program::equivalent_on(m, &f.program, &p, &inputs, DEFAULT_FUEL).unwrap();
    assert!(eq.equivalent);
}

#[test]
fn invalid_colorings_are_rejected() {
    let m = cm2();
    let ts = vec![fig1_trace()];
    let mut all_one = Coloring(vec![0; 8]);
    assert!(matches!(program_from_coloring(&m, &ts, &all_one), Err(SynthesisError::InvalidColoring(_))));
    all_one.0.pop();
    let faults = coloring_faults(&trace_graph(&m, &ts), &all_one);
    assert!(matches!(faults[0], ColoringFault::WrongLength { .. }));
}

#[test]
fn zero_length_trace_gives_start_only_program() {
    let m = cm2();
    let ts = vec![walk(&m, s(4, 4), &[])];
    let (p, k) = minimal_program(&m, &ts).unwrap();
    assert_eq!((k, p.states().len(), p.edges().len()), (1, 1, 0));
    assert!(k_consistent(&m, &ts, 1));
}

#[test]
fn csm_traces_give_at_most_nine_operation_states() {
    let f = fixture("csm").unwrap();
    let ts: Vec<ExtendedTrace> = f.traces.iter().map(|(_, gt)| gt.to_extended(&f.model).unwrap()).collect();
    let h = heuristic_coloring(&f.model, &ts);
    assert!(h.ok(), "{h:?}");
    let (p, k) = minimal_program(&f.model, &ts).unwrap();
    assert!(k - 1 <= 9, "{k}");
    assert!(reproduces(&f.model, &p, &ts));
}

#[test]
fn two_contexts_need_a_state_variable() {
    let plain = heuristic_coloring(&contexts::model(false), &contexts::traces(false));
    assert!(!plain.ok());
    let inc = plain.colors.iter().position(|c| c == "INC").unwrap();
    assert!(plain.adjacent.iter().chain(&plain.restriction).all(|(a, b)| {
        let ca = plain.coloring.0[a.line + if a.trace == 0 { 0 } else { 4 }];
        let cb = plain.coloring.0[b.line + if b.trace == 0 { 0 } else { 4 }];
        ca == inc && cb == inc
    }));
    let tagged = heuristic_coloring(&contexts::model(true), &contexts::traces(true));
    assert!(tagged.ok(), "{tagged:?}");
    // The exact search already finds the two increment states without help.
    let (p, _) = minimal_program(&contexts::model(false), &contexts::traces(false)).unwrap();
    assert_eq!(p.states().iter().filter(|s| s.op.as_deref() == Some("INC")).count(), 2);
}

#[test]
fn consistency_failures_name_their_class() {
    let m = cm2();
    let c = is_consistent(&m, &[vec![s(1, 1)], vec![s(2, 2), s(3, 2)]]);
    assert!(!c.consistent());
    let f = c.failure.unwrap();
    assert_eq!((f.depth, f.class, f.reason), (0, vec![0, 1], FailureReason::MixedLengths));
    let c = is_consistent(&m, &[vec![s(1, 1), s(2, 1)], vec![s(2, 2), s(2, 3)]]);
    assert_eq!(c.failure.unwrap().reason, FailureReason::NoCommonOperation);
    assert!(is_consistent(&m, &[vec![s(0, 1)], vec![s(1, 1), s(2, 1)]]).consistent());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn minimal_program_reproduces_and_matches_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = random_trace_set(&mut rng, 8);
        let m = cm2();
        match (minimal_program(&m, &ts), brute_min_colors(&m, &ts)) {
            (Ok((p, k)), Some(b)) => {
                prop_assert_eq!(k, b);
                prop_assert!(reproduces(&m, &p, &ts));
            }
            (Err(_), None) => {}
            (a, b) => prop_assert!(false, "solver {:?} vs oracle {:?}", a.map(|x| x.1), b),
        }
    }

    #[test]
    fn tree_witness_reproduces_program_traces(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = cm2();
        let n = rng.gen_range(2..=5);
        let p = random_program(&mut rng, n);
        let runs: Vec<_> = grid(2).iter().map(|i| run(&m, &p, i, None, 30)).filter(|r| r.terminated()).collect();
        let plain: Vec<_> = runs.iter().map(|r| r.trace.clone()).collect();
        let c = is_consistent(&m, &plain);
        let w = c.witness.expect("traces of one program are consistent");
        for t in &plain {
            prop_assert_eq!(&run(&m, &w, &t[0], None, t.len() as u64).trace, t);
        }
    }
}

#[test]
fn empty_trace_set() {
    let m = cm2();
    let g = trace_graph(&m, &[]);
    assert!(coloring_faults(&g, &Coloring(vec![])).is_empty());
    let p = program_from_coloring(&m, &[], &Coloring(vec![])).unwrap();
    assert_eq!(p.states().len(), 1);
}
