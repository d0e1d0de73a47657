//! One line per acceptance criterion. Exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracesynth::export::{emit_imperative, render, Format, PredicateStyle, RenderOptions};
use tracesynth::fixtures::{contexts, fixture, FIXTURE_NAMES};
use tracesynth::method::*;
use tracesynth::model::vm::VmSignature;
use tracesynth::model::{MachineState, Model, Value};
use tracesynth::program::{equivalent_on, run, Program, DEFAULT_FUEL};
use tracesynth::synthesis::*;
use tracesynth::trace::{validate_trace, ExtendedTrace, GeneralizedTrace};

type Outcome = Result<String, String>;

const SEED: u64 = 0x7ace_5eed;
const COLORING_INSTANCES: usize = 200;
const COLORING_MAX_LINES: usize = 10;
const COLORING_BUDGET: Duration = Duration::from_secs(60);
const ROUNDTRIP_PROGRAMS: usize = 100;
const ROUNDTRIP_MAX_STATES: usize = 5;
const ROUNDTRIP_FUEL: u64 = 100;
const WITNESS_SETS: usize = 50;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_fig1_replay() -> Outcome {
    let f = fixture("cm2_double").unwrap();
    let (gt, r) = GeneralizedTrace::record(&f.model, &f.program, &s(2, 1), DEFAULT_FUEL);
    ensure(r.trace.len() == 8, || format!("{} states", r.trace.len()))?;
    let text = gt.to_json_text(&f.model);
    ensure(f.file("trace-2-1.json") == Some(text.as_str()), || "recorded trace differs from fixture file".into())?;
    let path = replay(&f.model, &f.program, f.trace("trace-2-1.json").unwrap()).map_err(|e| e.to_string())?;
    ensure(path.states == r.visited, || format!("replay path {:?}", path.states))?;
    Ok(format!("{} bytes identical, replay path {}", text.len(), path.states.join(" ")))
}

fn c2_progeq() -> Outcome {
    let f = fixture("cm2_double").unwrap();
    let inputs = grid(5);
    let e = equivalent_on(&f.model, &f.program, &f.progeq().unwrap(), &inputs, DEFAULT_FUEL).map_err(|e| format!("{e:?}"))?;
    ensure(inputs.len() == 36 && e.equivalent, || format!("counterexample {:?}", e.counterexample))?;
    Ok("equivalent on 36 inputs".into())
}

fn c3_validation() -> Outcome {
    let m = cm2();
    let ok = validate_trace(&m, &[s(1, 2), s(2, 2), s(3, 2), s(3, 1)]);
    let a = validate_trace(&m, &[s(0, 1), s(2, 1)]);
    let b = validate_trace(&m, &[s(3, 4), s(3, 4)]);
    ensure(ok.valid && !a.valid && !b.valid, || "wrong verdicts".into())?;
    ensure(a.failed_step == Some(1) && b.failed_step == Some(1), || format!("{:?} {:?}", a.failed_step, b.failed_step))?;
    Ok("valid / invalid at step 1 / invalid at step 1".into())
}

fn c4_vm_counts() -> Outcome {
    let vm = VmSignature::new(
        &[("x", "int"), ("y", "int"), ("z", "float"), ("p", "bool"), ("q", "bool")],
        &[("DIV", &["int", "int"], "float"), ("XOR", &["bool", "bool"], "bool")],
    );
    let got = (vm.valid_assignments().len(), vm.operations_count(), vm.predicates(false).len());
    ensure(got == (12, 125, 2), || format!("{got:?}"))?;
    Ok("12 / 125 / 2".into())
}

fn csm_input(m: &Model, a: &[&str], b: &[&str]) -> MachineState {
    let arr = |xs: &[&str]| Value::StrArray(xs.iter().map(|x| x.to_string()).collect());
    m.state(&[("A", arr(a)), ("B", arr(b))]).unwrap()
}

fn c5_csm() -> Outcome {
    let f = fixture("csm").unwrap();
    let m = &f.model;
    let tables = f.trace_list();
    let mut failed = Vec::new();

    let g = verify_generalization(m, f.trace("table2.json").unwrap());
    let a = g.mismatches().count();
    if a != 0 || !g.unexplained.is_empty() {
        failed.push(format!("(a) {a} mismatches"));
    }

    let ops = collect_operations(&tables);
    let mut names = ops.names();
    names.sort();
    let table6 = ["ALEN", "ANBN", "ANBS", "ASBN", "BLEN", "INIT", "NO", "YES"];
    let same_maps = ops.operations.iter().all(|o| m.operation(&o.name).map(|d| d.assignments == o.assignments) == Some(true));
    if names != table6 || !same_maps || !ops.conflicts.is_empty() {
        failed.push(format!("(b) {names:?}"));
    }

    let cfg = synthesize_cfg(&tables).map_err(|e| e.to_string())?;
    let mut edges: Vec<(&str, &str)> = cfg.edges().iter().map(|e| (cfg.name(e.from), cfg.name(e.to))).collect();
    edges.sort();
    let mut fig5 = vec![
        ("Start", "INIT"), ("Start", "NO"), ("INIT", "ALEN"), ("INIT", "BLEN"), ("ALEN", "YES"), ("ALEN", "ANBS"),
        ("ALEN", "ANBN"), ("BLEN", "ASBN"), ("BLEN", "NO"), ("ANBS", "ALEN"), ("ANBN", "ALEN"), ("ASBN", "ALEN"),
        ("ANBS", "BLEN"),
    ];
    fig5.sort();
    let mut vertices: Vec<&str> = cfg.states().iter().map(|s| s.name.as_str()).collect();
    vertices.sort();
    let mut want_v = table6.to_vec();
    want_v.push("Start");
    want_v.sort();
    if edges != fig5 || vertices != want_v {
        failed.push("(c) partial graph differs".into());
    }

    let witness_inputs: [(&[&str], &[&str]); 2] = [(&["a"], &["b"]), (&["a", "aaa"], &["a", "a", "a", "a"])];
    let mut all = tables.clone();
    for (a, b) in witness_inputs {
        all.push(GeneralizedTrace::record(m, &f.program, &csm_input(m, a, b), DEFAULT_FUEL).0);
    }
    let report = verify_edge_predicates(m, &f.program, &all);
    if !report.ok() {
        let at: Vec<String> = report
            .violations
            .iter()
            .map(|v| format!("{} row {} {}->{}", f.traces.get(v.at.trace).map_or("witness", |t| t.0), v.at.row, v.from, v.to.as_deref().unwrap_or("end")))
            .collect();
        failed.push(format!("(d) {} violation(s): {}", report.violations.len() + report.failures.len(), at.join(", ")));
    }

    let six: [(&[&str], &[&str]); 6] = [
        (&["abab", "ab", "ab", "ab"], &["ab", "aba", "bab", "ab"]),
        (&["a", "a", "a"], &["aaa"]),
        (&["ba", "a"], &["b", "ab"]),
        (&["a"], &["aa"]),
        witness_inputs[0],
        witness_inputs[1],
    ];
    for (a, b) in six {
        let r = run(m, &f.program, &csm_input(m, a, b), None, DEFAULT_FUEL);
        let want = if a.concat() == b.concat() { "YES" } else { "NO" };
        if !r.terminated() || r.last_state() != want {
            failed.push(format!("(e) {a:?} {b:?} ended in {}", r.last_state()));
        }
    }
    if failed.is_empty() {
        Ok("(a)-(e) hold".into())
    } else {
        Err(failed.join("; "))
    }
}

fn c6_brute_force_coloring() -> Outcome {
    let m = cm2();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let t0 = Instant::now();
    let mut inconsistent = 0;
    for n in 0..COLORING_INSTANCES {
        let ts = random_trace_set(&mut rng, COLORING_MAX_LINES);
        let lines: usize = ts.iter().map(|t| t.len() + 1).sum();
        ensure(lines <= COLORING_MAX_LINES, || format!("instance {n} has {lines} lines"))?;
        let solver = minimal_program(&m, &ts);
        let oracle = brute_min_colors(&m, &ts);
        match (&solver, oracle) {
            (Ok((p, k)), Some(b)) if *k == b && p.states().len() == b && reproduces(&m, p, &ts) => {}
            (Err(_), None) => inconsistent += 1,
            _ => return Err(format!("instance {n}: solver {:?}, oracle {oracle:?}", solver.map(|x| x.1))),
        }
    }
    let took = t0.elapsed();
    ensure(took <= COLORING_BUDGET, || format!("took {took:?}"))?;
    Ok(format!("{COLORING_INSTANCES} instances ({inconsistent} inconsistent) in {:.2}s", took.as_secs_f64()))
}

fn c7_roundtrip() -> Outcome {
    let m = cm2();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    for n in 0..ROUNDTRIP_PROGRAMS {
        let size = rng.gen_range(1..=ROUNDTRIP_MAX_STATES);
        let p = random_program(&mut rng, size);
        let runs: Vec<_> = grid(3).iter().map(|i| run(&m, &p, i, None, ROUNDTRIP_FUEL)).filter(|r| r.terminated()).collect();
        let traces: Vec<ExtendedTrace> = runs.iter().map(ExtendedTrace::from_run).collect();
        let reach = p.reachable();
        let mut rank: BTreeMap<&str, usize> = BTreeMap::new();
        rank.insert(p.start_name(), 0);
        for &i in &reach {
            let next = rank.len();
            rank.entry(p.name(i)).or_insert(next);
        }
        ensure(k_consistent(&m, &traces, reach.len()), || format!("program {n}: not {}-consistent", reach.len()))?;
        let c = Coloring(runs.iter().flat_map(|r| r.visited.iter().map(|v| rank[v.as_str()])).collect());
        let q = program_from_coloring(&m, &traces, &c).map_err(|e| format!("program {n}: {e:?}"))?;
        ensure(reproduces(&m, &q, &traces), || format!("program {n}: colored program does not reproduce"))?;
    }
    Ok(format!("{ROUNDTRIP_PROGRAMS} programs"))
}

/// Whether some labelling of the plain traces with operations admits a program.
fn oracle_witness_exists(m: &Model, traces: &[Vec<MachineState>]) -> bool {
    let choices: Vec<Vec<Vec<String>>> = traces.iter().map(|t| validate_trace(m, t).witnesses).collect();
    let steps: Vec<&Vec<String>> = choices.iter().flatten().collect();
    if steps.iter().any(|c| c.is_empty()) {
        return false;
    }
    let mut pick = vec![0usize; steps.len()];
    loop {
        let mut flat = pick.iter().zip(&steps).map(|(&i, c)| c[i].clone());
        let xs: Vec<ExtendedTrace> =
            traces.iter().map(|t| ExtendedTrace::new(t.clone(), flat.by_ref().take(t.len() - 1).collect())).collect();
        if minimal_program(m, &xs).is_ok() {
            return true;
        }
        let Some(d) = (0..pick.len()).find(|&d| pick[d] + 1 < steps[d].len()) else { return false };
        pick[d] += 1;
        pick[..d].iter_mut().for_each(|p| *p = 0);
    }
}

fn c8_witness() -> Outcome {
    let m = cm2();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut consistent_sets = 0;
    let mut injected = 0;
    while consistent_sets < WITNESS_SETS || injected < WITNESS_SETS {
        let size = rng.gen_range(2..=4);
        let p = random_program(&mut rng, size);
        let mut plain: Vec<Vec<MachineState>> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let r = run(&m, &p, &s(rng.gen_range(0..4), rng.gen_range(0..4)), None, 12);
            if r.terminated() {
                plain.push(r.trace);
            }
        }
        let Some(long) = plain.iter().find(|t| t.len() > 1).cloned() else { continue };
        if consistent_sets < WITNESS_SETS {
            let c = is_consistent(&m, &plain);
            let w = c.witness.ok_or_else(|| format!("set {consistent_sets}: {:?}", c.failure))?;
            for t in &plain {
                let r = run(&m, &w, &t[0], None, DEFAULT_FUEL);
                ensure(r.terminated() && &r.trace == t, || format!("set {consistent_sets}: witness diverges"))?;
            }
            ensure(oracle_witness_exists(&m, &plain), || format!("set {consistent_sets}: oracle finds no program"))?;
            consistent_sets += 1;
        } else {
            // Same first word as `long`, but the trace stops immediately.
            let shifted: Vec<i64> = long[0].values.iter().map(|v| match v {
                Value::Int(0) => 0,
                Value::Int(x) => x + 1,
                _ => unreachable!(),
            }).collect();
            plain.push(vec![MachineState::ints(&shifted)]);
            let c = is_consistent(&m, &plain);
            let oracle = oracle_witness_exists(&m, &plain);
            ensure(c.consistent() == oracle && c.witness.is_some() == oracle, || format!("injected set {injected}: criterion {} oracle {oracle}", c.consistent()))?;
            ensure(!oracle, || format!("injected set {injected} stayed consistent"))?;
            injected += 1;
        }
    }
    Ok(format!("{WITNESS_SETS} consistent sets reproduced, {WITNESS_SETS} injected violations agree"))
}

fn c9_contexts() -> Outcome {
    let plain = heuristic_coloring(&contexts::model(false), &contexts::traces(false));
    ensure(!plain.ok(), || "no conflict without the state variable".into())?;
    let m = contexts::model(true);
    let ts = contexts::traces(true);
    let tagged = heuristic_coloring(&m, &ts);
    ensure(tagged.ok(), || format!("conflicts with the state variable: {tagged:?}"))?;
    let p = program_from_coloring(&m, &ts, &tagged.coloring).map_err(|e| format!("{e:?}"))?;
    let inc = contexts::increments(&m);
    let n = p.states().iter().filter(|s| s.op.as_deref().is_some_and(|o| inc.contains(&o))).count();
    ensure(n == 2, || format!("{n} increment states"))?;
    Ok(format!("{} conflict(s) without, none with; 2 increment states", plain.adjacent.len() + plain.restriction.len()))
}

fn c10_lindell() -> Outcome {
    let l = fixture("lindell").unwrap();
    let report = verify_edge_predicates(&l.model, &l.program, &l.trace_list());
    ensure(report.ok(), || format!("{report:?}"))?;
    let rows: usize = l.traces.iter().map(|t| t.1.rows.len()).sum();
    Ok(format!("{rows} rows replayed, 0 violations"))
}

fn c11_decision_tree() -> Outcome {
    let l = fixture("lindell").unwrap();
    let dt = l.decision_tree().unwrap();
    let preds = dt.predicates();
    let edges = expand_decision_tree(&dt, "RET2", Some(&l.program)).map_err(|e| e.to_string())?;
    ensure(edges.len() == 8, || format!("{} targets", edges.len()))?;
    for bits in 0u32..1 << preds.len() {
        let val = |p: &str| bits >> preds.iter().position(|q| q == p).unwrap() & 1 == 1;
        let hits = edges.iter().filter(|e| e.2.eval::<()>(&mut |p| Ok(val(p))).unwrap()).count();
        ensure(hits == 1, || format!("assignment {bits:b}: {hits} edges hold"))?;
    }
    let formula = |t: &str| edges.iter().find(|e| e.1 == t).map(|e| e.2.to_string()).unwrap_or_default();
    ensure(formula("INCH") == "!f=S & s'_is_last & h=tgt & seq=teq", || formula("INCH"))?;
    ensure(formula("NXTT") == "!f=S & !s'_is_last", || formula("NXTT"))?;
    Ok(format!("8 targets, exclusive and exhaustive over 2^{}", preds.len()))
}

fn c12_export() -> Outcome {
    for name in FIXTURE_NAMES {
        let f = fixture(name).unwrap();
        let names = f.model.predicate_names();
        for format in [Format::Dot, Format::Imperative, Format::Functional] {
            let opts = RenderOptions { format, predicates: PredicateStyle::Symbolic };
            let reloaded = Program::from_json_str(&f.program.to_json_text()).unwrap();
            ensure(render(&f.program, opts, &names) == render(&reloaded, opts, &names), || format!("{name} {format:?} unstable"))?;
        }
    }
    let f = fixture("cm2_double").unwrap();
    let text = emit_imperative(&f.program, PredicateStyle::Symbolic, &f.model.predicate_names());
    let block: Vec<&str> = text.lines().skip_while(|l| *l != "S_v:").take(5).collect();
    let want = ["S_v:", "  s <- R2-1(s)", "  if !R2=0 goto S_v", "  if R2=0 & !R1=0 goto S_w", "  goto END"];
    ensure(block == want, || format!("{block:?}"))?;
    ensure(text.lines().nth(text.lines().position(|l| l == "S_v:").unwrap() + 5).is_some_and(|l| !l.starts_with("  ")), || "extra lines in block".into())?;
    Ok("byte-identical renders; R2-1 block has three gotos".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("1 doubling trace replay", c1_fig1_replay),
        ("2 progeq equivalence", c2_progeq),
        ("3 validation triple", c3_validation),
        ("4 VM counts", c4_vm_counts),
        ("5 CSM end-to-end", c5_csm),
        ("6 brute-force coloring oracle", c6_brute_force_coloring),
        ("7 round trip", c7_roundtrip),
        ("8 consistency witness", c8_witness),
        ("9 heuristic failure", c9_contexts),
        ("10 Lindell replay", c10_lindell),
        ("11 decision tree", c11_decision_tree),
        ("12 export", c12_export),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS  {name}: {detail}"),
            Ok(Err(detail)) => {
                failures += 1;
                println!("FAIL  {name}: {detail}");
            }
            Err(_) => {
                failures += 1;
                println!("FAIL  {name}: panicked");
            }
        }
    }
    println!("{} of 12 criteria pass", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
