//! An inspectable description of polymetric sequences, compiled on demand to
//! a [`Pattern`].

use std::fmt;
use std::sync::Arc;

use crate::pattern::{pure, silence, stack, timecat, Pattern, Transform};
use crate::time::Fraction;

/// A named pattern transformation. Equality compares names only.
pub struct PatternFunction<A> {
    tag: String,
    function: Transform<A>,
}

impl<A> Clone for PatternFunction<A> {
    fn clone(&self) -> Self {
        PatternFunction {
            tag: self.tag.clone(),
            function: Arc::clone(&self.function),
        }
    }
}

impl<A> PartialEq for PatternFunction<A> {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag
    }
}

impl<A> fmt::Debug for PatternFunction<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.tag)
    }
}

impl<A> PatternFunction<A> {
    pub fn tag(&self) -> &str {
        &self.tag
    }
}

impl<A: Clone + Send + Sync + 'static> PatternFunction<A> {
    pub fn new(
        tag: impl Into<String>,
        function: impl Fn(&Pattern<A>) -> Pattern<A> + Send + Sync + 'static,
    ) -> Self {
        PatternFunction {
            tag: tag.into(),
            function: Arc::new(function),
        }
    }

    pub fn fast(factor: Fraction) -> Self {
        let tag = format!("fast {}", sexpr_fraction(&factor));
        PatternFunction::new(tag, move |p| p.fast(&factor))
    }

    pub fn slow(factor: Fraction) -> Self {
        let tag = format!("slow {}", sexpr_fraction(&factor));
        PatternFunction::new(tag, move |p| p.slow(&factor))
    }

    pub fn rev() -> Self {
        PatternFunction::new("rev", Pattern::rev)
    }

    pub fn apply(&self, pat: &Pattern<A>) -> Pattern<A> {
        (self.function)(pat)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rhythm<A> {
    Atom(A),
    Silence,
    /// One cycle divided among weighted steps.
    Subsequence(Vec<Step<A>>),
    /// Every member occupies every cycle.
    StackCycles(Vec<Rhythm<A>>),
    /// Every member advances `per_cycle` of its own steps each cycle.
    StackSteps {
        per_cycle: Fraction,
        rhythms: Vec<Rhythm<A>>,
    },
    Patterning {
        function: PatternFunction<A>,
        rhythm: Box<Rhythm<A>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step<A> {
    pub weight: Fraction,
    pub rhythm: Rhythm<A>,
}

impl<A> Step<A> {
    pub fn new(rhythm: Rhythm<A>) -> Self {
        Step {
            weight: Fraction::one(),
            rhythm,
        }
    }

    pub fn weighted(weight: Fraction, rhythm: Rhythm<A>) -> Self {
        Step { weight, rhythm }
    }
}

impl<A: Clone + Send + Sync + 'static> Rhythm<A> {
    /// A sequence of unit-weight atoms.
    pub fn sequence(values: impl IntoIterator<Item = A>) -> Self {
        Rhythm::Subsequence(values.into_iter().map(|v| Step::new(Rhythm::Atom(v))).collect())
    }

    pub fn patterning(function: PatternFunction<A>, rhythm: Rhythm<A>) -> Self {
        Rhythm::Patterning {
            function,
            rhythm: Box::new(rhythm),
        }
    }

    pub fn step_count(&self) -> Fraction {
        match self {
            Rhythm::Atom(_) | Rhythm::Silence => Fraction::one(),
            Rhythm::Subsequence(steps) => steps
                .iter()
                .fold(Fraction::zero(), |acc, s| acc + &s.weight),
            Rhythm::StackCycles(rs) | Rhythm::StackSteps { rhythms: rs, .. } => {
                rs.first().map_or_else(Fraction::zero, Rhythm::step_count)
            }
            Rhythm::Patterning { rhythm, .. } => rhythm.step_count(),
        }
    }

    pub fn to_pattern(&self) -> Pattern<A> {
        match self {
            Rhythm::Atom(v) => pure(v.clone()),
            Rhythm::Silence => silence(),
            Rhythm::Subsequence(steps) => timecat(
                steps
                    .iter()
                    .map(|s| (s.weight.clone(), s.rhythm.to_pattern()))
                    .collect(),
            ),
            Rhythm::StackCycles(rs) => stack(rs.iter().map(Rhythm::to_pattern).collect()),
            Rhythm::StackSteps { per_cycle, rhythms } => {
                if !per_cycle.is_positive() {
                    log::warn!("stack-steps with non-positive rate {per_cycle}: silence");
                    return silence();
                }
                stack(
                    rhythms
                        .iter()
                        .map(|r| {
                            let steps = r.step_count();
                            if steps.is_zero() {
                                log::warn!("stack-steps member has no steps: silence");
                                return silence();
                            }
                            r.to_pattern().fast(&(per_cycle / steps))
                        })
                        .collect(),
                )
            }
            Rhythm::Patterning { function, rhythm } => function.apply(&rhythm.to_pattern()),
        }
    }

    /// All atom values, depth first.
    pub fn atoms(&self) -> Vec<&A> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a A>) {
        match self {
            Rhythm::Atom(v) => out.push(v),
            Rhythm::Silence => {}
            Rhythm::Subsequence(steps) => steps.iter().for_each(|s| s.rhythm.collect_atoms(out)),
            Rhythm::StackCycles(rs) | Rhythm::StackSteps { rhythms: rs, .. } => {
                rs.iter().for_each(|r| r.collect_atoms(out))
            }
            Rhythm::Patterning { rhythm, .. } => rhythm.collect_atoms(out),
        }
    }
}

fn sexpr_fraction(x: &Fraction) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        x.to_string()
    }
}

impl<A: fmt::Display> Rhythm<A> {
    /// Debug s-expression, e.g. `(seq (atom bd) (stack-steps 2 ...))`.
    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        self.write_sexpr(&mut out);
        out
    }

    fn write_sexpr(&self, out: &mut String) {
        let list = |out: &mut String, head: &str, rs: &[Rhythm<A>]| {
            out.push('(');
            out.push_str(head);
            for r in rs {
                out.push(' ');
                r.write_sexpr(out);
            }
            out.push(')');
        };
        match self {
            Rhythm::Atom(v) => out.push_str(&format!("(atom {v})")),
            Rhythm::Silence => out.push_str("(silence)"),
            Rhythm::Subsequence(steps) => {
                out.push_str("(seq");
                for s in steps {
                    out.push(' ');
                    if s.weight == Fraction::one() {
                        s.rhythm.write_sexpr(out);
                    } else {
                        out.push_str(&format!("(weight {} ", sexpr_fraction(&s.weight)));
                        s.rhythm.write_sexpr(out);
                        out.push(')');
                    }
                }
                out.push(')');
            }
            Rhythm::StackCycles(rs) => list(out, "stack-cycles", rs),
            Rhythm::StackSteps { per_cycle, rhythms } => {
                list(out, &format!("stack-steps {}", sexpr_fraction(per_cycle)), rhythms)
            }
            Rhythm::Patterning { function, rhythm } => {
                list(out, function.tag(), std::slice::from_ref(rhythm.as_ref()))
            }
        }
    }
}
