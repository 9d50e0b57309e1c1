//! Random pattern recipes for property tests.

use proptest::prelude::*;
use riptide_core::pattern::{fastcat, pure, signal, silence, slowcat, stack, timecat, Pattern};
use riptide_core::time::{Fraction, Span};

fn f(n: i64, d: i64) -> Fraction {
    Fraction::new(n, d)
}

/// A recipe for a pattern, so failing cases print readably.
#[derive(Debug, Clone)]
pub enum Tree {
    Pure(i64),
    Silence,
    Fastcat(Vec<Tree>),
    Slowcat(Vec<Tree>),
    Timecat(Vec<(i64, Tree)>),
    Stack(Vec<Tree>),
    Fast(i64, i64, Box<Tree>),
    Slow(i64, i64, Box<Tree>),
    Early(i64, i64, Box<Tree>),
    Late(i64, i64, Box<Tree>),
    Rev(Box<Tree>),
    Every(i64, Box<Tree>),
    Iter(i64, Box<Tree>),
    Compress(i64, i64, Box<Tree>),
    Signal,
}

impl Tree {
    pub fn build(&self) -> Pattern<i64> {
        match self {
            Tree::Pure(v) => pure(*v),
            Tree::Silence => silence(),
            Tree::Fastcat(ts) => fastcat(ts.iter().map(Tree::build).collect()),
            Tree::Slowcat(ts) => slowcat(ts.iter().map(Tree::build).collect()),
            Tree::Timecat(ts) => timecat(ts.iter().map(|(w, t)| (Fraction::integer(*w), t.build())).collect()),
            Tree::Stack(ts) => stack(ts.iter().map(Tree::build).collect()),
            Tree::Fast(n, d, t) => t.build().fast(&f(*n, *d)),
            Tree::Slow(n, d, t) => t.build().slow(&f(*n, *d)),
            Tree::Early(n, d, t) => t.build().early(&f(*n, *d)),
            Tree::Late(n, d, t) => t.build().late(&f(*n, *d)),
            Tree::Rev(t) => t.build().rev(),
            Tree::Every(n, t) => t.build().every(*n, |p| p.fast(&f(2, 1))),
            Tree::Iter(n, t) => t.build().iter(*n),
            Tree::Compress(a, b, t) => t.build().compress(&f(*a, 4), &f(*b, 4)),
            Tree::Signal => signal(|t: &Fraction| (t.to_f64() * 8.0).floor() as i64),
        }
    }

    pub fn has_signal(&self) -> bool {
        match self {
            Tree::Signal => true,
            Tree::Pure(_) | Tree::Silence => false,
            Tree::Fastcat(ts) | Tree::Slowcat(ts) | Tree::Stack(ts) => ts.iter().any(Tree::has_signal),
            Tree::Timecat(ts) => ts.iter().any(|(_, t)| t.has_signal()),
            Tree::Fast(_, _, t)
            | Tree::Slow(_, _, t)
            | Tree::Early(_, _, t)
            | Tree::Late(_, _, t)
            | Tree::Rev(t)
            | Tree::Every(_, t)
            | Tree::Iter(_, t)
            | Tree::Compress(_, _, t) => t.has_signal(),
        }
    }
}

pub fn arb_tree(with_signals: bool) -> impl Strategy<Value = Tree> {
    let leaf = if with_signals {
        prop_oneof![4 => (0i64..10).prop_map(Tree::Pure), 1 => Just(Tree::Silence), 1 => Just(Tree::Signal)].boxed()
    } else {
        prop_oneof![4 => (0i64..10).prop_map(Tree::Pure), 1 => Just(Tree::Silence)].boxed()
    };
    leaf.prop_recursive(4, 24, 4, |inner| {
        let list = prop::collection::vec(inner.clone(), 1..4);
        prop_oneof![
            list.clone().prop_map(Tree::Fastcat),
            list.clone().prop_map(Tree::Slowcat),
            list.clone().prop_map(Tree::Stack),
            prop::collection::vec((1i64..4, inner.clone()), 1..4).prop_map(Tree::Timecat),
            (1i64..4, 1i64..4, inner.clone()).prop_map(|(n, d, t)| Tree::Fast(n, d, Box::new(t))),
            (1i64..4, 1i64..4, inner.clone()).prop_map(|(n, d, t)| Tree::Slow(n, d, Box::new(t))),
            (0i64..5, 1i64..4, inner.clone()).prop_map(|(n, d, t)| Tree::Early(n, d, Box::new(t))),
            (0i64..5, 1i64..4, inner.clone()).prop_map(|(n, d, t)| Tree::Late(n, d, Box::new(t))),
            inner.clone().prop_map(|t| Tree::Rev(Box::new(t))),
            (1i64..4, inner.clone()).prop_map(|(n, t)| Tree::Every(n, Box::new(t))),
            (1i64..5, inner.clone()).prop_map(|(n, t)| Tree::Iter(n, Box::new(t))),
            (0i64..3, inner).prop_map(|(a, t)| Tree::Compress(a, a + 1, Box::new(t))),
        ]
    })
}

/// A span on a 1/24 grid within [-2, 6], possibly zero-width.
pub fn arb_span() -> impl Strategy<Value = Span> {
    (-48i64..144, 0i64..72).prop_map(|(a, w)| Span::new(f(a, 24), f(a + w, 24)))
}

pub fn arb_wide_span() -> impl Strategy<Value = Span> {
    (-48i64..144, 2i64..72).prop_map(|(a, w)| Span::new(f(a, 24), f(a + w, 24)))
}

pub fn arb_factor() -> impl Strategy<Value = Fraction> {
    (1i64..6, 1i64..6).prop_map(|(n, d)| f(n, d))
}
