//! Combining patterns: the applicative family built on [`app`] and the
//! monadic family built on [`bind_whole`].
//!
//! Both families match up event fragments from two sources and differ only
//! in which whole the resulting fragment is taken to be part of. That
//! choice is a [`WholeChoice`]: the intersection of both wholes, the left
//! (function / outer) whole, or the right (value / inner) whole.

use std::fmt;
use std::sync::Arc;

use crate::pattern::{Event, Pattern, Transform};
use crate::time::{maybe_sect, sect, Fraction, Span};

type ChooseFn = dyn Fn(Option<&Span>, Option<&Span>) -> Option<Span> + Send + Sync;

/// Decides the whole of a combined fragment from the wholes of its two
/// sources.
#[derive(Clone)]
pub enum WholeChoice {
    /// Intersection of both wholes; absent if either is absent.
    Both,
    Left,
    Right,
    Custom(Arc<ChooseFn>),
}

impl WholeChoice {
    pub fn choose(&self, left: Option<&Span>, right: Option<&Span>) -> Option<Span> {
        match self {
            WholeChoice::Both => match (left, right) {
                (Some(a), Some(b)) => Some(sect(a, b)),
                _ => None,
            },
            WholeChoice::Left => left.cloned(),
            WholeChoice::Right => right.cloned(),
            WholeChoice::Custom(f) => f(left, right),
        }
    }
}

impl fmt::Debug for WholeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WholeChoice::Both => f.write_str("Both"),
            WholeChoice::Left => f.write_str("Left"),
            WholeChoice::Right => f.write_str("Right"),
            WholeChoice::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A unary operation carried as a pattern value.
pub type Op<A, B> = Arc<dyn Fn(&A) -> B + Send + Sync>;

/// Apply a pattern of operations to a pattern of values. Every pair of
/// overlapping fragments yields one fragment on their intersection, whose
/// whole is picked by `wf`.
pub fn app<A, B>(wf: WholeChoice, pf: &Pattern<Op<A, B>>, pv: &Pattern<A>) -> Pattern<B>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
{
    let (pf, pv) = (pf.clone(), pv.clone());
    Pattern::new(move |span| {
        let efs = pf.query(span);
        let evs = pv.query(span);
        let mut out = Vec::new();
        for ef in &efs {
            for ev in &evs {
                if let Some(active) = maybe_sect(&ef.active, &ev.active) {
                    out.push(Event::new(
                        wf.choose(ef.whole.as_ref(), ev.whole.as_ref()),
                        active,
                        (ef.value)(&ev.value),
                    ));
                }
            }
        }
        out
    })
}

/// Structure from both sides.
pub fn app_both<A, B>(pf: &Pattern<Op<A, B>>, pv: &Pattern<A>) -> Pattern<B>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
{
    app(WholeChoice::Both, pf, pv)
}

/// Structure from the operation side.
pub fn app_left<A, B>(pf: &Pattern<Op<A, B>>, pv: &Pattern<A>) -> Pattern<B>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
{
    app(WholeChoice::Left, pf, pv)
}

/// Structure from the value side.
pub fn app_right<A, B>(pf: &Pattern<Op<A, B>>, pv: &Pattern<A>) -> Pattern<B>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
{
    app(WholeChoice::Right, pf, pv)
}

/// Combine two value patterns with a binary function via [`app`].
pub fn app_with<A, B, C>(
    wf: WholeChoice,
    left: &Pattern<A>,
    right: &Pattern<B>,
    f: impl Fn(&A, &B) -> C + Send + Sync + 'static,
) -> Pattern<C>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
    C: Clone + Send + Sync + 'static,
{
    let f = Arc::new(f);
    let ops = left.with_value(move |a| {
        let f = Arc::clone(&f);
        Arc::new(move |b: &B| f(&a, b)) as Op<B, C>
    });
    app(wf, &ops, right)
}

/// For each outer event, query `f(value)` over the outer event's active
/// span; inner fragments keep their actives and take the whole chosen from
/// (outer whole, inner whole).
pub fn bind_whole<A, B>(
    choose: WholeChoice,
    pv: &Pattern<A>,
    f: impl Fn(&A) -> Pattern<B> + Send + Sync + 'static,
) -> Pattern<B>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
{
    let pv = pv.clone();
    Pattern::new(move |span| {
        let mut out = Vec::new();
        for outer in pv.query(span) {
            for inner in f(&outer.value).query(&outer.active) {
                out.push(Event::new(
                    choose.choose(outer.whole.as_ref(), inner.whole.as_ref()),
                    inner.active,
                    inner.value,
                ));
            }
        }
        out
    })
}

/// Wholes are the intersection of outer and inner wholes.
pub fn bind<A, B>(pv: &Pattern<A>, f: impl Fn(&A) -> Pattern<B> + Send + Sync + 'static) -> Pattern<B>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
{
    bind_whole(WholeChoice::Both, pv, f)
}

/// Structure comes from the inner patterns.
pub fn inner_bind<A, B>(
    pv: &Pattern<A>,
    f: impl Fn(&A) -> Pattern<B> + Send + Sync + 'static,
) -> Pattern<B>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
{
    bind_whole(WholeChoice::Right, pv, f)
}

/// Structure comes from the outer pattern.
pub fn outer_bind<A, B>(
    pv: &Pattern<A>,
    f: impl Fn(&A) -> Pattern<B> + Send + Sync + 'static,
) -> Pattern<B>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
{
    bind_whole(WholeChoice::Left, pv, f)
}

/// Lift a function taking a plain first argument into one taking a pattern
/// of them, keeping the structure of the result.
pub fn patternify1<A, B>(
    f: impl Fn(&A, &Pattern<B>) -> Pattern<B> + Send + Sync + 'static,
) -> impl Fn(&Pattern<A>, &Pattern<B>) -> Pattern<B>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
{
    let f = Arc::new(f);
    move |pa, pb| {
        let (f, pb) = (Arc::clone(&f), pb.clone());
        inner_bind(pa, move |a| f(a, &pb))
    }
}

impl<A: Clone + Send + Sync + 'static> Pattern<A> {
    pub fn fast_p(&self, factor: &Pattern<Fraction>) -> Self {
        patternify1(|n: &Fraction, p: &Pattern<A>| p.fast(n))(factor, self)
    }

    pub fn slow_p(&self, factor: &Pattern<Fraction>) -> Self {
        patternify1(|n: &Fraction, p: &Pattern<A>| p.slow(n))(factor, self)
    }

    pub fn early_p(&self, offset: &Pattern<Fraction>) -> Self {
        patternify1(|t: &Fraction, p: &Pattern<A>| p.early(t))(offset, self)
    }

    pub fn late_p(&self, offset: &Pattern<Fraction>) -> Self {
        patternify1(|t: &Fraction, p: &Pattern<A>| p.late(t))(offset, self)
    }

    pub fn every_p(&self, period: &Pattern<i64>, f: Transform<A>) -> Self {
        patternify1(move |n: &i64, p: &Pattern<A>| p.every(*n, |q| f(q)))(period, self)
    }

    pub fn iter_p(&self, divisions: &Pattern<i64>) -> Self {
        patternify1(|n: &i64, p: &Pattern<A>| p.iter(*n))(divisions, self)
    }
}
