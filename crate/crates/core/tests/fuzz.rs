use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use riptide_core::diagnostic::ParseDiagnostic;
use riptide_core::expr::{compile, parse_expr, Diagnostic};
use riptide_core::mini::parse_mini;
use riptide_core::time::Span;

const INPUTS: usize = 10_000;

const MINI_TOKENS: &[&str] = &[
    "bd", "sn", "3", "-1", "0.5", "~", "_", "[", "]", "<", ">", "{", "}", ",", "%", "*", "/", "!", "@", " ", " ",
    "2", "1%3", "x'", "a.b", "\n",
];

const EXPR_TOKENS: &[&str] = &[
    "s", "n", "fast", "slow", "rev", "every", "iter", "jux", "stack", "late", "early", "gain", "ctrl", "silence",
    "addboth", "wobble", "(", ")", "\"bd sn\"", "\"1 2\"", "\"<a b>\"", "\"[\"", "\"", "2", "0.25", "1/3", "-1", "|>",
    "#", "|+|", "|+", "+|", "|*|", "|<", ">|", " ", " ", "$",
];

fn random_bytes(rng: &mut StdRng) -> String {
    let len = rng.random_range(0..48);
    let bytes: Vec<u8> = (0..len).map(|_| rng.random()).collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

fn random_tokens(rng: &mut StdRng, alphabet: &[&str]) -> String {
    let len = rng.random_range(0..16);
    (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
}

fn assert_positioned(src: &str, d: &ParseDiagnostic) {
    assert!(d.offset <= src.len(), "{src:?}: offset {} past end", d.offset);
    assert!(!d.message.is_empty(), "{src:?}: empty message");
    let again = ParseDiagnostic::at(src, d.offset, d.message.clone());
    assert_eq!((again.line, again.column), (d.line, d.column), "{src:?}: inconsistent position");
}

fn assert_located(src: &str, d: &Diagnostic) {
    assert_positioned(
        src,
        &ParseDiagnostic {
            message: d.message.clone(),
            line: d.line,
            column: d.column,
            offset: d.offset,
        },
    );
}

#[test]
fn mini_parser_never_panics() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut failures = 0;
    for i in 0..INPUTS {
        let src = if i % 2 == 0 { random_bytes(&mut rng) } else { random_tokens(&mut rng, MINI_TOKENS) };
        match parse_mini(&src) {
            Ok(r) => {
                let _ = r.to_pattern().query(&Span::new(0, 1));
            }
            Err(d) => {
                failures += 1;
                assert_positioned(&src, &d);
            }
        }
    }
    assert!(failures > 0);
}

#[test]
fn expression_parser_never_panics() {
    let mut rng = StdRng::seed_from_u64(0xfeed);
    let mut outcomes = [0usize; 2];
    for i in 0..INPUTS {
        let src = if i % 2 == 0 { random_bytes(&mut rng) } else { random_tokens(&mut rng, EXPR_TOKENS) };
        if let Err(d) = parse_expr(&src) {
            assert_positioned(&src, &d);
        }
        match compile(&src) {
            Ok(p) => {
                outcomes[0] += 1;
                let _ = p.query(&Span::new(0, 1));
            }
            Err(d) => {
                outcomes[1] += 1;
                assert_located(&src, &d);
            }
        }
    }
    assert!(outcomes[0] > 0 && outcomes[1] > 0, "{outcomes:?}");
}
