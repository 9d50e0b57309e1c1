//! Slow, brute-force reference implementations used to check riptide-core.
//!
//! Nothing here shares code with the combinators it checks beyond the
//! primitive `query` of the operand patterns and the `Fraction`/`Span` types.

pub mod grid;
pub mod osc_decode;
pub mod recipe;
pub mod reference;

use rand::Rng;
use riptide_core::pattern::{Event, Pattern};
use riptide_core::time::{Fraction, Span};

/// Sort events and merge fragments of the same whole and value that touch.
pub fn normalize<A: Clone + PartialEq>(events: Vec<Event<A>>) -> Vec<Event<A>> {
    let mut events = events;
    events.sort_by(|a, b| {
        (&a.whole, &a.active.begin, &a.active.end)
            .partial_cmp(&(&b.whole, &b.active.begin, &b.active.end))
            .expect("spans are totally ordered")
    });
    let mut out: Vec<Event<A>> = Vec::new();
    // Duplicates are kept apart: each fragment extends at most one earlier
    // fragment of the same whole and value, the first one ending where it begins.
    for e in events {
        let open = out
            .iter_mut()
            .rev()
            .take_while(|o| o.whole == e.whole)
            .find(|o| o.whole.is_some() && o.value == e.value && o.active.end == e.active.begin);
        match open {
            Some(o) => o.active.end = e.active.end,
            None => out.push(e),
        }
    }
    out.sort_by(|a, b| {
        (&a.active.begin, &a.active.end, &a.whole)
            .partial_cmp(&(&b.active.begin, &b.active.end, &b.whole))
            .expect("spans are totally ordered")
    });
    out
}

/// A random span with endpoints on a grid of `1/denominator` inside
/// `[0, cycles]`, at least one grid step wide.
pub fn random_span(rng: &mut impl Rng, cycles: i64, denominator: i64) -> Span {
    let steps = cycles * denominator;
    let a = rng.random_range(0..steps);
    let b = rng.random_range(a + 1..=steps);
    Span::new(Fraction::new(a, denominator), Fraction::new(b, denominator))
}

/// Compare two patterns on `samples` random spans within the first eight
/// cycles, after merging fragments. Returns the first differing span.
pub fn observationally_equal<A: Clone + PartialEq + Send + Sync + 'static>(
    a: &Pattern<A>,
    b: &Pattern<A>,
    rng: &mut impl Rng,
    samples: usize,
) -> Result<(), Span> {
    for _ in 0..samples {
        let span = random_span(rng, 8, 24);
        if normalize(a.query(&span)) != normalize(b.query(&span)) {
            return Err(span);
        }
    }
    Ok(())
}
