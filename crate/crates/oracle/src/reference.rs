//! A direct interpreter for `Rhythm` that walks the tree with an explicit
//! affine time map instead of composing pattern transformations.

use riptide_core::pattern::Event;
use riptide_core::rhythm::Rhythm;
use riptide_core::time::{Fraction, Span};

/// `outer = offset + inner * scale`
#[derive(Clone)]
struct Affine {
    offset: Fraction,
    scale: Fraction,
}

impl Affine {
    fn identity() -> Self {
        Affine {
            offset: Fraction::zero(),
            scale: Fraction::one(),
        }
    }

    fn outer(&self, t: &Fraction) -> Fraction {
        &self.offset + t * &self.scale
    }

    fn inner(&self, t: &Fraction) -> Fraction {
        (t - &self.offset) / &self.scale
    }

    /// Compose with a map applied first, in inner coordinates.
    fn then(&self, offset: Fraction, scale: Fraction) -> Affine {
        Affine {
            offset: self.outer(&offset),
            scale: &self.scale * scale,
        }
    }
}

fn clip(a: &Span, b: &Span) -> Option<Span> {
    let begin = a.begin.clone().max(b.begin.clone());
    let end = a.end.clone().min(b.end.clone());
    (begin < end).then(|| Span::new(begin, end))
}

fn cycle_range(span: &Span) -> std::ops::Range<i64> {
    let first = span.begin.floor();
    let last = span.end.floor();
    let to_i64 = |f: Fraction| -> i64 { f.numer().try_into().expect("cycle fits in i64") };
    let end = if span.end.is_integer() { to_i64(last) } else { to_i64(last) + 1 };
    to_i64(first)..end
}

/// Events of `r` over non-zero-width `span`, in outer time.
pub fn events<A: Clone + Send + Sync + 'static>(r: &Rhythm<A>, span: &Span) -> Vec<Event<A>> {
    assert!(!span.is_instant(), "reference evaluator needs a non-zero-width span");
    let mut out = Vec::new();
    walk(r, &Affine::identity(), span, &mut out);
    out
}

/// `window` is in outer time; `map` takes this node's local time to outer.
fn walk<A: Clone + Send + Sync + 'static>(r: &Rhythm<A>, map: &Affine, window: &Span, out: &mut Vec<Event<A>>) {
    let local = Span::new(map.inner(&window.begin), map.inner(&window.end));
    match r {
        Rhythm::Silence => {}
        Rhythm::Atom(v) => {
            for c in cycle_range(&local) {
                let whole = Span::new(map.outer(&Fraction::integer(c)), map.outer(&Fraction::integer(c + 1)));
                if let Some(active) = clip(&whole, window) {
                    out.push(Event::new(Some(whole), active, v.clone()));
                }
            }
        }
        Rhythm::Subsequence(steps) => {
            let total = steps.iter().fold(Fraction::zero(), |acc, s| acc + &s.weight);
            if !total.is_positive() {
                return;
            }
            for c in cycle_range(&local) {
                let mut at = Fraction::zero();
                for step in steps {
                    if !step.weight.is_positive() {
                        continue;
                    }
                    let begin = Fraction::integer(c) + &at / &total;
                    at = at + &step.weight;
                    let end = Fraction::integer(c) + &at / &total;
                    let slot = Span::new(map.outer(&begin), map.outer(&end));
                    let Some(sub_window) = clip(&slot, window) else { continue };
                    // Child cycle c is squeezed into this slot of cycle c.
                    let width = &step.weight / &total;
                    let child = map.then(&begin - Fraction::integer(c) * &width, width);
                    walk(&step.rhythm, &child, &sub_window, out);
                }
            }
        }
        Rhythm::StackCycles(rs) => {
            for r in rs {
                walk(r, map, window, out);
            }
        }
        Rhythm::StackSteps { per_cycle, rhythms } => {
            if !per_cycle.is_positive() {
                return;
            }
            for r in rhythms {
                let steps = r.step_count();
                if steps.is_positive() {
                    walk(r, &map.then(Fraction::zero(), steps / per_cycle), window, out);
                }
            }
        }
        Rhythm::Patterning { function, rhythm } => {
            let tag = function.tag();
            let (name, arg) = tag.split_once(' ').unwrap_or((tag, ""));
            let factor = || arg.parse::<Fraction>().expect("numeric patterning argument");
            match name {
                "fast" => walk(rhythm, &map.then(Fraction::zero(), factor().recip()), window, out),
                "slow" => walk(rhythm, &map.then(Fraction::zero(), factor()), window, out),
                other => panic!("reference evaluator has no rule for {other}"),
            }
        }
    }
}
