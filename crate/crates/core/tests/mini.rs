use std::path::PathBuf;

use proptest::prelude::*;
use riptide_core::mini::parse_mini;
use riptide_core::pattern::{fastcat, pure, slowcat, stack, Event, Pattern};
use riptide_core::rhythm::{Rhythm, Step};
use riptide_core::time::{Fraction, Span};
use riptide_oracle::{normalize, reference};
use serde::{Deserialize, Serialize};

fn f(n: i64, d: i64) -> Fraction {
    Fraction::new(n, d)
}

fn span(b: (i64, i64), e: (i64, i64)) -> Span {
    Span::new(f(b.0, b.1), f(e.0, e.1))
}

fn compile(src: &str) -> Pattern<String> {
    parse_mini(src).unwrap_or_else(|e| panic!("{src}: {e}")).to_pattern()
}

fn table(events: &[Event<String>]) -> Vec<(&str, Span)> {
    events
        .iter()
        .map(|e| (e.value.as_str(), e.whole.clone().expect("discrete")))
        .collect()
}

fn atom(s: &str) -> Pattern<String> {
    pure(s.to_string())
}

#[test]
fn nested_halving() {
    let got = compile("bd [sn sn]").query(&Span::new(0, 1));
    assert_eq!(
        table(&got),
        vec![
            ("bd", span((0, 1), (1, 2))),
            ("sn", span((1, 2), (3, 4))),
            ("sn", span((3, 4), (1, 1))),
        ]
    );
    assert!(got.iter().all(|e| e.whole.as_ref() == Some(&e.active)));
}

#[test]
fn polymeter_lanes_over_three_cycles() {
    let got = compile("{a b, c d e}%2").query(&Span::new(0, 3));
    let half = |k: i64| span((k, 2), (k + 1, 2));
    let lane2 = ["c", "d", "e", "c", "d", "e"];
    let mut expected = Vec::new();
    for k in 0..6i64 {
        expected.push((if k % 2 == 0 { "a" } else { "b" }, half(k)));
        expected.push((lane2[k as usize], half(k)));
    }
    assert_eq!(table(&got), expected);
}

#[test]
fn alternation_is_slowcat() {
    let s = Span::new(0, 2);
    assert_eq!(compile("<a b>").query(&s), slowcat(vec![atom("a"), atom("b")]).query(&s));
    let s = Span::new(0, 6);
    assert_eq!(
        compile("<a b c>").query(&s),
        slowcat(vec![atom("a"), atom("b"), atom("c")]).query(&s)
    );
}

#[test]
fn rhythm_invariants() {
    let s = Span::new(0, 3);
    for n in 1..=8 {
        let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let r = Rhythm::sequence(names.clone());
        let direct = fastcat(names.iter().map(|v| atom(v)).collect());
        assert_eq!(r.to_pattern().query(&s), direct.query(&s), "n={n}");
    }
    let lanes = vec![Rhythm::sequence(["a", "b"].map(String::from)), Rhythm::sequence(["c", "d", "e"].map(String::from))];
    let stacked = Rhythm::StackCycles(lanes.clone());
    assert_eq!(
        stacked.to_pattern().query(&s),
        stack(lanes.iter().map(Rhythm::to_pattern).collect()).query(&s)
    );
    let single = Rhythm::StackSteps {
        per_cycle: f(2, 1),
        rhythms: vec![lanes[1].clone()],
    };
    assert_eq!(single.to_pattern().query(&s), lanes[1].to_pattern().fast(&f(2, 3)).query(&s));
    let weighted = Rhythm::Subsequence(vec![
        Step::weighted(f(5, 2), Rhythm::Atom("a".to_string())),
        Step::weighted(f(1, 3), Rhythm::Atom("b".to_string())),
    ]);
    let got = weighted.to_pattern().query(&Span::new(0, 1));
    assert_eq!(got[0].active.len() / got[1].active.len(), f(15, 2));
}

fn arb_mini() -> impl Strategy<Value = String> {
    let word = prop_oneof![Just("bd"), Just("sn"), Just("hh"), Just("~"), Just("3")].prop_map(String::from);
    let step = word.prop_recursive(3, 16, 3, |inner| {
        let seq = prop::collection::vec(inner.clone(), 1..4).prop_map(|v| v.join(" "));
        prop_oneof![
            seq.clone().prop_map(|s| format!("[{s}]")),
            seq.clone().prop_map(|s| format!("<{s}>")),
            (seq.clone(), seq.clone()).prop_map(|(a, b)| format!("{{{a}, {b}}}%2")),
            (inner.clone(), 1u8..4).prop_map(|(s, n)| format!("{s}*{n}")),
            (inner.clone(), 1u8..4).prop_map(|(s, n)| format!("{s}!{n}")),
            (inner, 1u8..4).prop_map(|(s, n)| format!("{s}@{n}")),
        ]
    });
    prop::collection::vec(step, 1..5).prop_map(|v| v.join(" "))
}

/// Pad around brackets and separators without touching postfix operators.
fn spaced(src: &str, pad: &str) -> String {
    let mut out = String::new();
    for ch in src.chars() {
        match ch {
            '[' | '<' | '{' => {
                out.push_str(pad);
                out.push(ch);
                out.push_str(pad);
            }
            ']' | '>' | '}' | ',' => {
                out.push_str(pad);
                out.push(ch);
                if ch == ',' {
                    out.push_str(pad);
                }
            }
            ' ' => out.push_str(pad),
            _ => out.push(ch),
        }
    }
    format!("{pad}{out}{pad}")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn whitespace_insensitive(src in arb_mini(), pad in prop_oneof![Just("  "), Just("\t"), Just(" \n ")]) {
        let plain = parse_mini(&src).expect("generated input parses");
        prop_assert_eq!(parse_mini(&spaced(&src, pad)).expect("padded input parses"), plain);
    }

    #[test]
    fn compiled_matches_reference_interpreter(src in arb_mini(), start in 0i64..8) {
        let r = parse_mini(&src).expect("generated input parses");
        let s = Span::new(f(start, 2), f(start + 8, 2));
        prop_assert_eq!(normalize(r.to_pattern().query(&s)), normalize(reference::events(&r, &s)));
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Golden {
    src: String,
    sexpr: String,
    events: Vec<Event<String>>,
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

#[test]
fn corpus_matches_goldens() {
    let sources = std::fs::read_to_string(corpus_dir().join("mini.txt")).expect("corpus present");
    let sources: Vec<&str> = sources.lines().filter(|l| !l.trim().is_empty()).collect();
    assert!(sources.len() >= 25, "corpus has {} entries", sources.len());
    let span = Span::new(0, 4);
    let mut computed = Vec::new();
    for src in &sources {
        let r = parse_mini(src).unwrap_or_else(|e| panic!("{src}: {e}"));
        let events = r.to_pattern().query(&span);
        // Checked against the independent interpreter before it is frozen.
        assert_eq!(normalize(events.clone()), normalize(reference::events(&r, &span)), "{src}");
        computed.push(Golden {
            src: src.to_string(),
            sexpr: r.to_sexpr(),
            events,
        });
    }
    let path = corpus_dir().join("mini.golden.json");
    if std::env::var_os("RIPTIDE_BLESS").is_some() {
        let text = serde_json::to_string_pretty(&computed).expect("serializable");
        std::fs::write(&path, text + "\n").expect("golden written");
    }
    let committed: Vec<Golden> =
        serde_json::from_str(&std::fs::read_to_string(&path).expect("golden present; run with RIPTIDE_BLESS=1"))
            .expect("golden parses");
    assert_eq!(committed.len(), computed.len());
    for (want, got) in committed.iter().zip(&computed) {
        assert_eq!(want, got, "{}", got.src);
    }
}
