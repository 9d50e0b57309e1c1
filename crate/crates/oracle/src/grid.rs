//! Cell-sampling oracles for the applicative and monadic combinators.
//!
//! The query span is cut at every fragment boundary of the operands into
//! elementary cells. Each cell is looked up independently, and cells with
//! the same sources are glued back together afterwards.

use std::collections::BTreeSet;

use riptide_core::pattern::{Event, Pattern};
use riptide_core::time::{Fraction, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Both,
    Left,
    Right,
}

fn covers(active: &Span, cell: &Span) -> bool {
    active.begin <= cell.begin && cell.end <= active.end
}

fn cells(span: &Span, points: impl IntoIterator<Item = Fraction>) -> Vec<Span> {
    let mut cuts: BTreeSet<Fraction> = points
        .into_iter()
        .filter(|p| &span.begin < p && p < &span.end)
        .collect();
    cuts.insert(span.begin.clone());
    cuts.insert(span.end.clone());
    let cuts: Vec<Fraction> = cuts.into_iter().collect();
    cuts.windows(2).map(|w| Span::new(w[0].clone(), w[1].clone())).collect()
}

fn overlap(a: &Span, b: &Span) -> Span {
    Span::new(a.begin.clone().max(b.begin.clone()), a.end.clone().min(b.end.clone()))
}

fn boundaries<A>(events: &[Event<A>]) -> impl Iterator<Item = Fraction> + '_ {
    events.iter().flat_map(|e| [e.active.begin.clone(), e.active.end.clone()])
}

/// Glue cells that share a key and touch.
fn glue<K: PartialEq, A: Clone + PartialEq>(mut cells: Vec<(K, Event<A>)>) -> Vec<Event<A>> {
    let mut out: Vec<(K, Event<A>)> = Vec::new();
    cells.sort_by(|a, b| a.1.active.begin.cmp(&b.1.active.begin));
    'next: for (key, e) in cells {
        for (k, o) in out.iter_mut() {
            if *k == key && o.value == e.value && o.active.end == e.active.begin {
                o.active.end = e.active.end;
                continue 'next;
            }
        }
        out.push((key, e));
    }
    let mut events: Vec<Event<A>> = out.into_iter().map(|(_, e)| e).collect();
    events.sort_by(|a, b| {
        (&a.active.begin, &a.active.end).cmp(&(&b.active.begin, &b.active.end))
    });
    events
}

fn pick(structure: Structure, left: &Span, right: &Span) -> Span {
    match structure {
        Structure::Both => overlap(left, right),
        Structure::Left => left.clone(),
        Structure::Right => right.clone(),
    }
}

/// `f` applied to every pair of discrete left and right fragments that
/// overlap, over non-zero-width `span`.
pub fn app<A, B, C>(
    structure: Structure,
    left: &Pattern<A>,
    right: &Pattern<B>,
    f: impl Fn(&A, &B) -> C,
    span: &Span,
) -> Vec<Event<C>>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
    C: Clone + PartialEq,
{
    assert!(!span.is_instant(), "grid oracle needs a non-zero-width span");
    let ls = left.query(span);
    let rs = right.query(span);
    let mut found = Vec::new();
    for cell in cells(span, boundaries(&ls).chain(boundaries(&rs))) {
        for l in ls.iter().filter(|e| covers(&e.active, &cell)) {
            for r in rs.iter().filter(|e| covers(&e.active, &cell)) {
                let (Some(lw), Some(rw)) = (&l.whole, &r.whole) else {
                    continue;
                };
                let whole = pick(structure, lw, rw);
                found.push((
                    (lw.clone(), rw.clone()),
                    Event::new(Some(whole), cell.clone(), f(&l.value, &r.value)),
                ));
            }
        }
    }
    glue(found)
}

/// For every discrete outer fragment, the inner pattern built from its
/// value, sampled cell by cell over the fragment's active span.
pub fn bind<A, B>(
    structure: Structure,
    outer: &Pattern<A>,
    f: impl Fn(&A) -> Pattern<B>,
    span: &Span,
) -> Vec<Event<B>>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + PartialEq + Send + Sync + 'static,
{
    assert!(!span.is_instant(), "grid oracle needs a non-zero-width span");
    let mut found = Vec::new();
    for o in outer.query(span) {
        let Some(ow) = &o.whole else { continue };
        let inner = f(&o.value);
        let coarse = inner.query(&o.active);
        for cell in cells(&o.active, boundaries(&coarse)) {
            for i in inner.query(&cell) {
                let Some(iw) = &i.whole else { continue };
                if i.active != cell {
                    continue;
                }
                let whole = pick(structure, ow, iw);
                found.push(((ow.clone(), iw.clone()), Event::new(Some(whole), cell.clone(), i.value)));
            }
        }
    }
    glue(found)
}

/// `app` evaluated on the lattice `[k/l, (k+1)/l]`: both operands are
/// queried on each lattice cell separately and their fragments intersected
/// there. `span` must lie on the lattice.
pub fn app_on_lattice<A, B, C>(
    structure: Structure,
    left: &Pattern<A>,
    right: &Pattern<B>,
    f: impl Fn(&A, &B) -> C,
    span: &Span,
    l: i64,
) -> Vec<Event<C>>
where
    A: Clone + Send + Sync + 'static,
    B: Clone + Send + Sync + 'static,
    C: Clone + PartialEq,
{
    let lattice = Fraction::integer(l);
    let first = &span.begin * &lattice;
    let last = &span.end * &lattice;
    assert!(first.is_integer() && last.is_integer(), "span must lie on the 1/{l} lattice");
    let to_i64 = |f: &Fraction| -> i64 { f.numer().try_into().expect("lattice index fits in i64") };
    let mut found = Vec::new();
    for k in to_i64(&first)..to_i64(&last) {
        let cell = Span::new(Fraction::new(k, l), Fraction::new(k + 1, l));
        let ls = left.query(&cell);
        let rs = right.query(&cell);
        for lf in &ls {
            for rf in &rs {
                let (Some(lw), Some(rw)) = (&lf.whole, &rf.whole) else { continue };
                let both = overlap_opt(&lf.active, &rf.active);
                let Some(active) = both else { continue };
                found.push((
                    (lw.clone(), rw.clone()),
                    Event::new(Some(pick(structure, lw, rw)), active, f(&lf.value, &rf.value)),
                ));
            }
        }
    }
    glue(found)
}

fn overlap_opt(a: &Span, b: &Span) -> Option<Span> {
    let begin = a.begin.clone().max(b.begin.clone());
    let end = a.end.clone().min(b.end.clone());
    (begin < end).then(|| Span::new(begin, end))
}
