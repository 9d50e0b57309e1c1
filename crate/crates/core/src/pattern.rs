//! Patterns as pure functions from a queried span to event fragments.
//!
//! An [`Event`] carries the `active` span actually covered by the query and,
//! for discrete events, the `whole` span it is a fragment of. Continuous
//! patterns (signals) have no whole.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::time::{maybe_sect, Fraction, Span};

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Event<A> {
    pub whole: Option<Span>,
    pub active: Span,
    pub value: A,
}

impl<A> Event<A> {
    pub fn new(whole: Option<Span>, active: Span, value: A) -> Self {
        Event {
            whole,
            active,
            value,
        }
    }

    /// True when this fragment starts where its whole starts.
    pub fn has_onset(&self) -> bool {
        self.whole
            .as_ref()
            .is_some_and(|w| w.begin == self.active.begin)
    }

    /// Map both the whole and the active span.
    pub fn with_span(self, f: impl Fn(&Span) -> Span) -> Self {
        Event {
            whole: self.whole.as_ref().map(&f),
            active: f(&self.active),
            value: self.value,
        }
    }

    pub fn with_value<B>(self, f: impl FnOnce(A) -> B) -> Event<B> {
        Event {
            whole: self.whole,
            active: self.active,
            value: f(self.value),
        }
    }
}

impl<A: fmt::Debug> fmt::Debug for Event<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.whole {
            Some(w) => write!(f, "{w:?}{:?} {:?}", self.active, self.value),
            None => write!(f, "~{:?} {:?}", self.active, self.value),
        }
    }
}

type QueryFn<A> = dyn Fn(&Span) -> Vec<Event<A>> + Send + Sync;

/// A pattern of values of type `A`: a pure function of a time span.
pub struct Pattern<A> {
    query: Arc<QueryFn<A>>,
}

impl<A> Clone for Pattern<A> {
    fn clone(&self) -> Self {
        Pattern {
            query: Arc::clone(&self.query),
        }
    }
}

impl<A> fmt::Debug for Pattern<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Pattern(..)")
    }
}

/// A pattern-to-pattern function, used wherever transformations are passed
/// around as values.
pub type Transform<A> = Arc<dyn Fn(&Pattern<A>) -> Pattern<A> + Send + Sync>;

impl<A: Clone + Send + Sync + 'static> Pattern<A> {
    pub fn new(query: impl Fn(&Span) -> Vec<Event<A>> + Send + Sync + 'static) -> Self {
        Pattern {
            query: Arc::new(query),
        }
    }

    /// Events whose active spans fall within `span`, ordered by active
    /// begin then end. Ties keep the order the constituents produced them in.
    pub fn query(&self, span: &Span) -> Vec<Event<A>> {
        let mut events = (self.query)(span);
        events.sort_by(|a, b| a.active.cmp(&b.active));
        events
    }

    /// Query once per cycle piece of the span.
    pub fn split_queries(&self) -> Self {
        let pat = self.clone();
        Pattern::new(move |span| {
            span.cycles()
                .iter()
                .flat_map(|piece| pat.query(piece))
                .collect()
        })
    }

    /// Transform query spans on the way in.
    pub fn with_query_span(&self, f: impl Fn(&Span) -> Span + Send + Sync + 'static) -> Self {
        let pat = self.clone();
        Pattern::new(move |span| pat.query(&f(span)))
    }

    /// Transform event spans (whole and active) on the way out.
    pub fn with_event_span(&self, f: impl Fn(&Span) -> Span + Send + Sync + 'static) -> Self {
        let pat = self.clone();
        Pattern::new(move |span| {
            pat.query(span)
                .into_iter()
                .map(|e| e.with_span(&f))
                .collect()
        })
    }

    pub fn with_value<B: Clone + Send + Sync + 'static>(
        &self,
        f: impl Fn(A) -> B + Send + Sync + 'static,
    ) -> Pattern<B> {
        let pat = self.clone();
        Pattern::new(move |span| {
            pat.query(span)
                .into_iter()
                .map(|e| e.with_value(&f))
                .collect()
        })
    }

    /// Speed up by `factor`. A zero factor yields silence; a negative one
    /// plays the reversed pattern at the absolute rate.
    pub fn fast(&self, factor: &Fraction) -> Self {
        if factor.is_zero() {
            log::warn!("fast/slow by zero: substituting silence");
            return silence();
        }
        if factor.is_negative() {
            return self.fast(&factor.abs()).rev();
        }
        let into = factor.clone();
        let out = factor.clone();
        self.with_query_span(move |s| s.with_time(|t| t * &into))
            .with_event_span(move |s| s.with_time(|t| t / &out))
    }

    pub fn slow(&self, factor: &Fraction) -> Self {
        if factor.is_zero() {
            return self.fast(factor);
        }
        self.fast(&factor.recip())
    }

    /// Shift `offset` cycles earlier.
    pub fn early(&self, offset: &Fraction) -> Self {
        if offset.is_zero() {
            return self.clone();
        }
        let into = offset.clone();
        let out = offset.clone();
        self.with_query_span(move |s| s.with_time(|t| t + &into))
            .with_event_span(move |s| s.with_time(|t| t - &out))
    }

    /// Shift `offset` cycles later.
    pub fn late(&self, offset: &Fraction) -> Self {
        self.early(&-offset)
    }

    /// Squeeze each cycle into the sub-span `[begin, end)` of that cycle,
    /// leaving the rest silent. `begin` and `end` are cycle positions in
    /// `[0, 1]`.
    pub fn compress(&self, begin: &Fraction, end: &Fraction) -> Self {
        if begin >= end || begin.is_negative() || end > &Fraction::one() {
            return silence();
        }
        let pat = self.clone();
        let (begin, end) = (begin.clone(), end.clone());
        let width = &end - &begin;
        Pattern::new(move |span| {
            let mut out = Vec::new();
            for piece in span.cycles() {
                let cycle = piece.begin.sam();
                let slot = Span {
                    begin: &cycle + &begin,
                    end: &cycle + &end,
                };
                let Some(inner) = maybe_sect(&piece, &slot) else {
                    continue;
                };
                let to_inner = |t: &Fraction| &cycle + (t - &slot.begin) / &width;
                let to_outer = |t: &Fraction| &slot.begin + (t - &cycle) * &width;
                out.extend(
                    pat.query(&inner.with_time(to_inner))
                        .into_iter()
                        .map(|e| e.with_span(|s| s.with_time(to_outer))),
                );
            }
            out
        })
    }

    /// Reflect time within each cycle.
    pub fn rev(&self) -> Self {
        let pat = self.clone();
        Pattern::new(move |span| {
            let mut out = Vec::new();
            for piece in span.cycles() {
                let cycle = piece.begin.sam();
                let axis = &cycle + cycle.next_sam();
                let reflect = |s: &Span| Span {
                    begin: &axis - &s.end,
                    end: &axis - &s.begin,
                };
                if piece.is_instant() && piece.begin == cycle {
                    // The reflected instant would land on the next cycle, so
                    // sample this cycle's reflection at its start instead.
                    let whole_cycle = Span::whole_cycle(&cycle);
                    out.extend(pat.query(&whole_cycle).into_iter().filter_map(|e| {
                        let active = maybe_sect(&reflect(&e.active), &piece)?;
                        Some(Event::new(e.whole.as_ref().map(reflect), active, e.value))
                    }));
                } else {
                    out.extend(
                        pat.query(&reflect(&piece))
                            .into_iter()
                            .map(|e| e.with_span(reflect)),
                    );
                }
            }
            out
        })
    }

    /// Apply `f` on cycles whose index is a multiple of `n`.
    pub fn every(&self, n: i64, f: impl Fn(&Pattern<A>) -> Pattern<A>) -> Self {
        if n <= 0 {
            log::warn!("every: period must be positive, got {n}; leaving pattern unchanged");
            return self.clone();
        }
        let transformed = f(self);
        let plain = self.clone();
        let period = BigInt::from(n);
        Pattern::new(move |span| {
            span.cycles()
                .iter()
                .flat_map(|piece| {
                    if piece.begin.floor_int().mod_floor(&period) == BigInt::from(0) {
                        transformed.query(piece)
                    } else {
                        plain.query(piece)
                    }
                })
                .collect()
        })
    }

    /// On cycle `c`, play the pattern shifted `c/n` cycles earlier, so that
    /// successive cycles start one `n`th further in.
    pub fn iter(&self, n: i64) -> Self {
        if n <= 0 {
            log::warn!("iter: division must be positive, got {n}; leaving pattern unchanged");
            return self.clone();
        }
        let pat = self.clone();
        let divisions = Fraction::integer(n);
        Pattern::new(move |span| {
            span.cycles()
                .iter()
                .flat_map(|piece| {
                    let shift = piece.begin.sam() / &divisions;
                    pat.query(&piece.with_time(|t| t + &shift))
                        .into_iter()
                        .map(|e| e.with_span(|s| s.with_time(|t| t - &shift)))
                        .collect::<Vec<_>>()
                })
                .collect()
        })
    }

    /// Only the fragments that carry an onset.
    pub fn onsets_only(&self) -> Self {
        let pat = self.clone();
        Pattern::new(move |span| onsets_only(pat.query(span)))
    }
}

pub fn silence<A: Clone + Send + Sync + 'static>() -> Pattern<A> {
    Pattern::new(|_| Vec::new())
}

/// One event per cycle, whole cycle long.
pub fn pure<A: Clone + Send + Sync + 'static>(value: A) -> Pattern<A> {
    Pattern::new(move |span| {
        span.cycles()
            .into_iter()
            .map(|piece| Event::new(Some(Span::whole_cycle(&piece.begin)), piece, value.clone()))
            .collect()
    })
}

/// A continuous pattern sampled at the midpoint of each query.
pub fn signal<A: Clone + Send + Sync + 'static>(
    f: impl Fn(&Fraction) -> A + Send + Sync + 'static,
) -> Pattern<A> {
    Pattern::new(move |span| vec![Event::new(None, span.clone(), f(&span.midpoint()))])
}

/// `(sin(2πt) + 1) / 2`, ranging over `[0, 1]` once per cycle.
pub fn sine() -> Pattern<f64> {
    signal(|t| ((t.to_f64() * std::f64::consts::TAU).sin() + 1.0) / 2.0)
}

/// Rises linearly from 0 to 1 over each cycle.
pub fn saw() -> Pattern<f64> {
    signal(|t| t.cycle_pos().to_f64())
}

pub fn stack<A: Clone + Send + Sync + 'static>(pats: Vec<Pattern<A>>) -> Pattern<A> {
    if pats.is_empty() {
        return silence();
    }
    Pattern::new(move |span| pats.iter().flat_map(|p| p.query(span)).collect())
}

/// One constituent per cycle, in turn. Each constituent sees consecutive
/// cycles of its own timeline.
pub fn slowcat<A: Clone + Send + Sync + 'static>(pats: Vec<Pattern<A>>) -> Pattern<A> {
    if pats.is_empty() {
        return silence();
    }
    if pats.len() == 1 {
        return pats.into_iter().next().unwrap();
    }
    let count = BigInt::from(pats.len());
    Pattern::new(move |span| {
        let mut out = Vec::new();
        for piece in span.cycles() {
            let cycle = piece.begin.floor_int();
            let index = cycle.mod_floor(&count);
            let offset = Fraction::from(&cycle - (&cycle - &index) / &count);
            let pat = &pats[usize::try_from(&index).expect("index below pattern count")];
            out.extend(
                pat.query(&piece.with_time(|t| t - &offset))
                    .into_iter()
                    .map(|e| e.with_span(|s| s.with_time(|t| t + &offset))),
            );
        }
        out
    })
}

/// All constituents squeezed into each cycle.
pub fn fastcat<A: Clone + Send + Sync + 'static>(pats: Vec<Pattern<A>>) -> Pattern<A> {
    let n = Fraction::integer(pats.len() as i64);
    if pats.is_empty() {
        return silence();
    }
    slowcat(pats).fast(&n)
}

/// Divide each cycle among the constituents in proportion to their weights.
/// Entries with non-positive weight are dropped.
pub fn timecat<A: Clone + Send + Sync + 'static>(weighted: Vec<(Fraction, Pattern<A>)>) -> Pattern<A> {
    let weighted: Vec<_> = weighted
        .into_iter()
        .filter(|(w, _)| {
            if !w.is_positive() {
                log::warn!("timecat: dropping step with non-positive weight {w}");
            }
            w.is_positive()
        })
        .collect();
    let total = weighted
        .iter()
        .fold(Fraction::zero(), |acc, (w, _)| acc + w);
    let mut pos = Fraction::zero();
    let mut slices = Vec::with_capacity(weighted.len());
    for (w, pat) in weighted {
        let end = &pos + &w;
        slices.push(pat.compress(&(&pos / &total), &(&end / &total)));
        pos = end;
    }
    stack(slices)
}

pub fn onsets_only<A>(events: Vec<Event<A>>) -> Vec<Event<A>> {
    events.into_iter().filter(Event::has_onset).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: i64, d: i64) -> Fraction {
        Fraction::new(n, d)
    }

    fn sp(b: (i64, i64), e: (i64, i64)) -> Span {
        Span::new(f(b.0, b.1), f(e.0, e.1))
    }

    fn ev<A>(whole: Span, active: Span, value: A) -> Event<A> {
        Event::new(Some(whole), active, value)
    }

    fn abc(names: &str) -> Pattern<String> {
        fastcat(names.split(' ').map(|n| pure(n.to_string())).collect())
    }

    fn summary(events: &[Event<String>]) -> Vec<(String, Span)> {
        events
            .iter()
            .map(|e| (e.value.clone(), e.whole.clone().unwrap()))
            .collect()
    }

    #[test]
    fn silence_is_empty() {
        let p = silence::<i32>();
        assert!(p.query(&sp((0, 1), (1, 1))).is_empty());
        assert!(p.query(&sp((-5, 1), (100, 1))).is_empty());
        assert!(p.query(&sp((1, 2), (1, 2))).is_empty());
    }

    #[test]
    fn pure_splits_per_cycle() {
        assert_eq!(
            pure("bd").query(&sp((0, 1), (1, 1))),
            vec![ev(sp((0, 1), (1, 1)), sp((0, 1), (1, 1)), "bd")]
        );
        assert_eq!(
            pure("bd").query(&sp((1, 2), (3, 2))),
            vec![
                ev(sp((0, 1), (1, 1)), sp((1, 2), (1, 1)), "bd"),
                ev(sp((1, 1), (2, 1)), sp((1, 1), (3, 2)), "bd"),
            ]
        );
        assert_eq!(
            pure(7).query(&sp((1, 4), (1, 4))),
            vec![ev(sp((0, 1), (1, 1)), sp((1, 4), (1, 4)), 7)]
        );
    }

    #[test]
    fn signals_sample_midpoint() {
        let id = signal(|t: &Fraction| t.clone());
        assert_eq!(
            id.query(&sp((0, 1), (1, 1))),
            vec![Event::new(None, sp((0, 1), (1, 1)), f(1, 2))]
        );
        let v = sine().query(&sp((1, 4), (1, 4)));
        assert_eq!(v.len(), 1);
        assert!((v[0].value - 1.0).abs() < 1e-12);
        assert_eq!(
            signal(|_| 3).query(&sp((0, 1), (2, 1))),
            vec![Event::new(None, sp((0, 1), (2, 1)), 3)]
        );
    }

    #[test]
    fn stack_edges() {
        let s = stack(vec![pure("a"), pure("b")]).query(&sp((0, 1), (1, 1)));
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].value, s[1].value), ("a", "b"));
        assert!(stack::<i32>(vec![]).query(&sp((0, 1), (4, 1))).is_empty());
    }

    #[test]
    fn fast_halves_wholes() {
        let wholes: Vec<_> = pure("x")
            .fast(&f(2, 1))
            .query(&sp((0, 1), (1, 1)))
            .into_iter()
            .map(|e| e.whole.unwrap())
            .collect();
        assert_eq!(wholes, vec![sp((0, 1), (1, 2)), sp((1, 2), (1, 1))]);
    }

    #[test]
    fn fast_by_zero_is_silence() {
        assert!(pure(1).fast(&Fraction::zero()).query(&sp((0, 1), (2, 1))).is_empty());
        assert!(pure(1).slow(&Fraction::zero()).query(&sp((0, 1), (2, 1))).is_empty());
    }

    #[test]
    fn late_quarter() {
        assert_eq!(
            pure("x").late(&f(1, 4)).query(&sp((0, 1), (1, 1))),
            vec![
                ev(sp((-3, 4), (1, 4)), sp((0, 1), (1, 4)), "x"),
                ev(sp((1, 4), (5, 4)), sp((1, 4), (1, 1)), "x"),
            ]
        );
    }

    #[test]
    fn cat_examples() {
        let ab = vec![pure("a".to_string()), pure("b".to_string())];
        assert_eq!(
            summary(&fastcat(ab.clone()).query(&sp((0, 1), (1, 1)))),
            vec![("a".into(), sp((0, 1), (1, 2))), ("b".into(), sp((1, 2), (1, 1)))]
        );
        assert_eq!(
            summary(&slowcat(ab.clone()).query(&sp((0, 1), (2, 1)))),
            vec![("a".into(), sp((0, 1), (1, 1))), ("b".into(), sp((1, 1), (2, 1)))]
        );
        assert_eq!(
            slowcat(ab).query(&sp((1, 1), (3, 2))),
            vec![ev(sp((1, 1), (2, 1)), sp((1, 1), (3, 2)), "b".to_string())]
        );
    }

    #[test]
    fn slowcat_constituents_see_their_own_cycles() {
        // The inner alternation advances once per visit, not once per cycle.
        let inner = slowcat(vec![pure("x".to_string()), pure("y".to_string())]);
        let outer = slowcat(vec![inner, pure("z".to_string())]);
        let vals: Vec<_> = outer
            .query(&sp((0, 1), (4, 1)))
            .into_iter()
            .map(|e| e.value)
            .collect();
        assert_eq!(vals, vec!["x", "z", "y", "z"]);
    }

    #[test]
    fn timecat_weights() {
        let p = timecat(vec![(f(3, 1), pure("a".to_string())), (f(1, 1), pure("b".to_string()))]);
        assert_eq!(
            summary(&p.query(&sp((0, 1), (1, 1)))),
            vec![("a".into(), sp((0, 1), (3, 4))), ("b".into(), sp((3, 4), (1, 1)))]
        );
        assert!(timecat::<i32>(vec![]).query(&sp((0, 1), (1, 1))).is_empty());
    }

    #[test]
    fn rev_examples() {
        assert_eq!(
            summary(&abc("a b").rev().query(&sp((0, 1), (1, 1)))),
            vec![("b".into(), sp((0, 1), (1, 2))), ("a".into(), sp((1, 2), (1, 1)))]
        );
        assert_eq!(
            summary(&abc("a b c").rev().query(&sp((1, 1), (2, 1)))),
            vec![
                ("c".into(), sp((1, 1), (4, 3))),
                ("b".into(), sp((4, 3), (5, 3))),
                ("a".into(), sp((5, 3), (2, 1))),
            ]
        );
    }

    #[test]
    fn rev_instant_at_cycle_start() {
        let got = abc("a b").rev().query(&Span::instant(f(1, 1)));
        assert_eq!(
            got,
            vec![ev(sp((1, 1), (3, 2)), Span::instant(f(1, 1)), "b".to_string())]
        );
    }

    #[test]
    fn every_and_iter() {
        let got = summary(&abc("a b").every(2, Pattern::rev).query(&sp((0, 1), (2, 1))));
        let names: Vec<_> = got.iter().map(|(v, _)| v.as_str()).collect();
        assert_eq!(names, vec!["b", "a", "a", "b"]);

        let got = summary(&abc("a b c d").iter(4).query(&sp((1, 1), (2, 1))));
        assert_eq!(
            got,
            vec![
                ("b".into(), sp((1, 1), (5, 4))),
                ("c".into(), sp((5, 4), (3, 2))),
                ("d".into(), sp((3, 2), (7, 4))),
                ("a".into(), sp((7, 4), (2, 1))),
            ]
        );
    }

    #[test]
    fn every_one_always_applies() {
        let p = abc("a b c");
        let s = sp((0, 1), (5, 1));
        assert_eq!(p.every(1, Pattern::rev).query(&s), p.rev().query(&s));
        assert_eq!(p.every(0, Pattern::rev).query(&s), p.query(&s));
    }

    #[test]
    fn onsets() {
        let got = onsets_only(pure("x").query(&sp((1, 2), (3, 2))));
        assert_eq!(got, vec![ev(sp((1, 1), (2, 1)), sp((1, 1), (3, 2)), "x")]);
        assert!(onsets_only(saw().query(&sp((0, 1), (1, 1)))).is_empty());
        assert_eq!(onsets_only(pure("x").query(&sp((0, 1), (1, 1)))).len(), 1);
    }

    #[test]
    fn event_json_shape() {
        let e = ev(sp((0, 1), (1, 2)), sp((0, 1), (1, 2)), "bd");
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"whole":{"begin":"0/1","end":"1/2"},"active":{"begin":"0/1","end":"1/2"},"value":"bd"}"#
        );
        let s = Event::new(None, sp((0, 1), (1, 1)), 1);
        assert!(serde_json::to_string(&s).unwrap().starts_with(r#"{"whole":null"#));
    }
}
