use std::sync::Arc;

use proptest::prelude::*;
use serde_json::{json, Value as Json};
use tracesynth::fixtures::{fixture, trees::TreeValue, Fixture};
use tracesynth::model::Value;
use tracesynth::program::{run, Outcome};

/// Nested-array JSON for the tree whose node `i + 2` has parent `parents[i] % (i + 1) + 1`.
fn tree_json(parents: &[usize]) -> Json {
    let n = parents.len() + 1;
    let mut kids = vec![Vec::new(); n + 1];
    for (i, &p) in parents.iter().enumerate() {
        kids[p % (i + 1) + 1].push(i + 2);
    }
    fn build(v: usize, kids: &[Vec<usize>]) -> Json {
        let mut a = vec![json!(v)];
        a.extend(kids[v].iter().map(|&c| build(c, kids)));
        Json::Array(a)
    }
    build(1, &kids)
}

/// AHU canonical string; equal iff the unordered trees are isomorphic.
fn canon(j: &Json) -> String {
    let a = j.as_array().unwrap();
    let mut cs: Vec<String> = a[1..].iter().map(canon).collect();
    cs.sort();
    format!("({})", cs.concat())
}

fn compare(f: &Fixture, s: &Json, t: &Json) -> String {
    let tv = |j: &Json| Value::Tree(Arc::new(TreeValue::from_json(j).unwrap()));
    let input = f.model.state(&[("S", tv(s)), ("T", tv(t))]).unwrap();
    let r = run(&f.model, &f.program, &input, None, 1_000_000);
    assert_eq!(r.outcome, Outcome::Terminated, "{s} vs {t}");
    let last = r.trace.last().unwrap();
    match f.model.get(last, "res").unwrap() {
        Value::Enum(l) => l.clone(),
        other => panic!("res = {other}"),
    }
}

#[test]
fn cross_comparison_on_blocks_with_several_members() {
    let f = fixture("lindell").unwrap();
    // Root with three children of size 2, in different orders.
    let s = json!([1, [2, [3]], [4, [5]], [6, [7]]]);
    let t = json!([1, [2, [3]], [4, [5]], [6, [7]]]);
    assert_eq!(compare(&f, &s, &t), "iso");
    // Same sizes, different shapes: a path of 3 vs a cherry.
    let a = json!([1, [2, [3, [4]]], [5, [6], [7]]]);
    let b = json!([1, [2, [3], [4]], [5, [6, [7]]]]);
    assert_eq!(compare(&f, &a, &b), "iso");
    let c = json!([1, [2, [3], [4]], [5, [6], [7]]]);
    let ac = compare(&f, &a, &c);
    let ca = compare(&f, &c, &a);
    assert_ne!(ac, "iso");
    assert_eq!((ac == "lt"), (ca == "gt"));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    #[test]
    fn program_decides_isomorphism(
        ps in proptest::collection::vec(0usize..64, 0..8),
        pt in proptest::collection::vec(0usize..64, 0..8),
    ) {
        let f = fixture("lindell").unwrap();
        let (s, t) = (tree_json(&ps), tree_json(&pt));
        let st = compare(&f, &s, &t);
        let ts = compare(&f, &t, &s);
        prop_assert_eq!(st == "iso", canon(&s) == canon(&t));
        let flipped = match st.as_str() { "lt" => "gt", "gt" => "lt", x => x };
        prop_assert_eq!(ts.as_str(), flipped);
    }

    #[test]
    fn isomorphic_relabelling_is_iso(ps in proptest::collection::vec(0usize..64, 0..9), seed in any::<u64>()) {
        let f = fixture("lindell").unwrap();
        let s = tree_json(&ps);
        // Shuffle every child list deterministically from the seed.
        fn shuffle(j: &Json, seed: u64) -> Json {
            let a = j.as_array().unwrap();
            let mut kids: Vec<Json> = a[1..].iter().enumerate().map(|(i, c)| shuffle(c, seed.rotate_left(i as u32 + 1))).collect();
            let n = kids.len();
            for i in (1..n).rev() {
                kids.swap(i, (seed.wrapping_mul(i as u64 + 7) % (i as u64 + 1)) as usize);
            }
            let mut out = vec![a[0].clone()];
            out.extend(kids);
            Json::Array(out)
        }
        let t = shuffle(&s, seed);
        prop_assert_eq!(compare(&f, &s, &t), "iso");
    }
}
