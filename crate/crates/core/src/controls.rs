//! Control maps (synth messages) and the operator family that combines
//! control patterns.
//!
//! | spelling | structure | values              |
//! |----------|-----------|---------------------|
//! | `#`      | left      | union, right wins   |
//! | `\|+`    | left      | add                 |
//! | `+\|`    | right     | add                 |
//! | `\|+\|`  | both      | add                 |
//! | `\|-` …  | …         | subtract            |
//! | `\|*` …  | …         | multiply            |
//! | `\|/` …  | …         | divide              |
//! | `\|<` …  | …         | union, left wins    |
//! | `>\|` …  | …         | union, right wins   |

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::combine::{app_with, WholeChoice};
use crate::pattern::{pure, stack, Pattern};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ControlValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl ControlValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ControlValue::Int(i) => Some(*i as f64),
            ControlValue::Float(x) => Some(*x),
            ControlValue::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            ControlValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for ControlValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlValue::Int(i) => write!(f, "{i}"),
            ControlValue::Float(x) => write!(f, "{x}"),
            ControlValue::Text(s) => write!(f, "{s}"),
        }
    }
}

impl From<i64> for ControlValue {
    fn from(v: i64) -> Self {
        ControlValue::Int(v)
    }
}

impl From<i32> for ControlValue {
    fn from(v: i32) -> Self {
        ControlValue::Int(v.into())
    }
}

impl From<f64> for ControlValue {
    fn from(v: f64) -> Self {
        ControlValue::Float(v)
    }
}

impl From<String> for ControlValue {
    fn from(v: String) -> Self {
        ControlValue::Text(v)
    }
}

impl From<&str> for ControlValue {
    fn from(v: &str) -> Self {
        ControlValue::Text(v.to_string())
    }
}

/// Parameter name to value, iterating in insertion order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ControlMap(IndexMap<String, ControlValue>);

impl ControlMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(key: impl Into<String>, value: impl Into<ControlValue>) -> Self {
        let mut map = Self::new();
        map.insert(key, value);
        map
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<ControlValue>) {
        self.0.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&ControlValue> {
        self.0.get(key)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ControlValue)> {
        self.0.iter()
    }
}

impl fmt::Display for ControlMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        f.write_str("}")
    }
}

impl<K: Into<String>, V: Into<ControlValue>> FromIterator<(K, V)> for ControlMap {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        ControlMap(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

pub type ControlPattern = Pattern<ControlMap>;

/// Wrap each value in a one-key control map.
pub fn ctrl<V>(name: &str, pat: &Pattern<V>) -> ControlPattern
where
    V: Into<ControlValue> + Clone + Send + Sync + 'static,
{
    let name = name.to_string();
    pat.with_value(move |v| ControlMap::single(name.clone(), v))
}

pub fn sound(pat: &Pattern<String>) -> ControlPattern {
    ctrl("sound", pat)
}

pub fn n<V: Into<ControlValue> + Clone + Send + Sync + 'static>(pat: &Pattern<V>) -> ControlPattern {
    ctrl("n", pat)
}

pub fn note<V: Into<ControlValue> + Clone + Send + Sync + 'static>(pat: &Pattern<V>) -> ControlPattern {
    ctrl("note", pat)
}

pub fn speed<V: Into<ControlValue> + Clone + Send + Sync + 'static>(pat: &Pattern<V>) -> ControlPattern {
    ctrl("speed", pat)
}

pub fn gain<V: Into<ControlValue> + Clone + Send + Sync + 'static>(pat: &Pattern<V>) -> ControlPattern {
    ctrl("gain", pat)
}

pub fn pan<V: Into<ControlValue> + Clone + Send + Sync + 'static>(pat: &Pattern<V>) -> ControlPattern {
    ctrl("pan", pat)
}

/// Which operand's wholes survive a combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Left,
    Right,
    Both,
}

impl Structure {
    pub fn whole_choice(self) -> WholeChoice {
        match self {
            Structure::Left => WholeChoice::Left,
            Structure::Right => WholeChoice::Right,
            Structure::Both => WholeChoice::Both,
        }
    }
}

/// How two control maps are merged key by key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Add,
    Sub,
    Mul,
    Div,
    UnionLeft,
    UnionRight,
}

impl Combine {
    fn symbol(self) -> &'static str {
        match self {
            Combine::Add => "+",
            Combine::Sub => "-",
            Combine::Mul => "*",
            Combine::Div => "/",
            Combine::UnionLeft => "<",
            Combine::UnionRight => ">",
        }
    }

    fn word(self) -> &'static str {
        match self {
            Combine::Add => "add",
            Combine::Sub => "sub",
            Combine::Mul => "mul",
            Combine::Div => "div",
            Combine::UnionLeft => "keep",
            Combine::UnionRight => "set",
        }
    }

    fn numeric(self, a: &ControlValue, b: &ControlValue) -> Option<ControlValue> {
        use ControlValue::{Float, Int};
        let float = |x: f64, y: f64| {
            let r = match self {
                Combine::Add => x + y,
                Combine::Sub => x - y,
                Combine::Mul => x * y,
                Combine::Div => x / y,
                Combine::UnionLeft | Combine::UnionRight => unreachable!(),
            };
            r.is_finite().then_some(Float(r))
        };
        match (a, b) {
            (Int(x), Int(y)) => {
                let exact = match self {
                    Combine::Add => x.checked_add(*y),
                    Combine::Sub => x.checked_sub(*y),
                    Combine::Mul => x.checked_mul(*y),
                    _ => None,
                };
                match exact {
                    Some(v) => Some(Int(v)),
                    None => float(*x as f64, *y as f64),
                }
            }
            _ => float(a.as_f64()?, b.as_f64()?),
        }
    }
}

/// A complete operator: structure plus value combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Operator {
    pub structure: Structure,
    pub combine: Combine,
}

impl Operator {
    pub const fn new(structure: Structure, combine: Combine) -> Self {
        Operator { structure, combine }
    }

    /// Every operator with its infix spelling.
    pub fn all() -> Vec<Operator> {
        use Combine::*;
        let mut ops = Vec::new();
        for combine in [Add, Sub, Mul, Div, UnionLeft, UnionRight] {
            for structure in [Structure::Left, Structure::Right, Structure::Both] {
                ops.push(Operator::new(structure, combine));
            }
        }
        ops
    }

    /// `#` is structure from the left with right-biased union.
    pub fn symbol(self) -> String {
        if self == Operator::new(Structure::Left, Combine::UnionRight) {
            return "#".into();
        }
        let c = self.combine.symbol();
        match self.structure {
            Structure::Left => format!("|{c}"),
            Structure::Right => format!("{c}|"),
            Structure::Both => format!("|{c}|"),
        }
    }

    /// Word form, e.g. `addboth`, `mulleft`, `setright`.
    pub fn name(self) -> String {
        let side = match self.structure {
            Structure::Left => "left",
            Structure::Right => "right",
            Structure::Both => "both",
        };
        format!("{}{side}", self.combine.word())
    }

    pub fn from_symbol(s: &str) -> Option<Operator> {
        if s == "#" {
            return Some(Operator::new(Structure::Left, Combine::UnionRight));
        }
        Operator::all().into_iter().find(|op| op.symbol() == s)
    }

    pub fn from_name(s: &str) -> Option<Operator> {
        Operator::all().into_iter().find(|op| op.name() == s)
    }

    pub fn apply(self, left: &ControlPattern, right: &ControlPattern) -> ControlPattern {
        op_mix(self.structure, self.combine, left, right)
    }
}

/// Merge two maps. Keys on one side only are kept. Clashing keys are
/// combined arithmetically, or resolved by bias for the union variants.
/// Arithmetic that cannot apply (text operands, non-finite results) drops
/// the key.
pub fn combine_maps(left: &ControlMap, right: &ControlMap, combine: Combine) -> ControlMap {
    let mut out = left.clone();
    for (key, rv) in right.iter() {
        let Some(lv) = left.get(key) else {
            out.insert(key.clone(), rv.clone());
            continue;
        };
        match combine {
            Combine::UnionLeft => {}
            Combine::UnionRight => out.insert(key.clone(), rv.clone()),
            _ => match combine.numeric(lv, rv) {
                Some(v) => out.insert(key.clone(), v),
                None => {
                    log::warn!(
                        "cannot apply '{}' to {key}: {lv} and {rv}; dropping {key}",
                        combine.symbol()
                    );
                    out.0.shift_remove(key);
                }
            },
        }
    }
    out
}

/// Union of two maps with the given bias.
pub fn union(left: &ControlMap, right: &ControlMap, prefer_right: bool) -> ControlMap {
    let combine = if prefer_right {
        Combine::UnionRight
    } else {
        Combine::UnionLeft
    };
    combine_maps(left, right, combine)
}

pub fn op_mix(
    structure: Structure,
    combine: Combine,
    left: &ControlPattern,
    right: &ControlPattern,
) -> ControlPattern {
    app_with(structure.whole_choice(), left, right, move |a, b| {
        combine_maps(a, b, combine)
    })
}

/// `p # q`: structure from `p`, values from `q` where keys clash.
pub fn set(left: &ControlPattern, right: &ControlPattern) -> ControlPattern {
    op_mix(Structure::Left, Combine::UnionRight, left, right)
}

/// Play `p` hard left and `f(p)` hard right.
pub fn jux(f: impl Fn(&ControlPattern) -> ControlPattern, pat: &ControlPattern) -> ControlPattern {
    stack(vec![
        set(pat, &pan(&pure(0.0))),
        set(&f(pat), &pan(&pure(1.0))),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{fastcat, silence};
    use crate::time::{Fraction, Span};

    fn unit() -> Span {
        Span::new(0, 1)
    }

    fn map(pairs: &[(&str, ControlValue)]) -> ControlMap {
        pairs.iter().cloned().collect()
    }

    #[test]
    fn constructors() {
        let e = sound(&pure("bd".to_string())).query(&unit());
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].value, ControlMap::single("sound", "bd"));
        assert_eq!(pan(&pure(0.5)).query(&unit())[0].value, ControlMap::single("pan", 0.5));
        let vals: Vec<_> = n(&fastcat(vec![pure(0i64), pure(3)]))
            .query(&unit())
            .into_iter()
            .map(|e| e.value)
            .collect();
        assert_eq!(vals, vec![ControlMap::single("n", 0i64), ControlMap::single("n", 3i64)]);
    }

    #[test]
    fn unions() {
        let bd = ControlMap::single("sound", "bd");
        let sn = ControlMap::single("sound", "sn");
        assert_eq!(union(&bd, &sn, true), sn);
        assert_eq!(
            union(&ControlMap::single("a", 1), &ControlMap::single("b", 2), false),
            map(&[("a", 1.into()), ("b", 2.into())])
        );
        assert_eq!(union(&ControlMap::new(), &bd, true), bd);
    }

    #[test]
    fn text_arithmetic_drops_key() {
        let l = map(&[("sound", "bd".into()), ("n", 1.into())]);
        let r = map(&[("sound", "sn".into()), ("n", 2.5.into())]);
        assert_eq!(combine_maps(&l, &r, Combine::Add), map(&[("n", 3.5.into())]));
    }

    #[test]
    fn int_arithmetic() {
        let one = ControlMap::single("n", 1);
        assert_eq!(combine_maps(&one, &one, Combine::Add), ControlMap::single("n", 2));
        assert_eq!(
            combine_maps(&one, &ControlMap::single("n", 4), Combine::Div),
            ControlMap::single("n", 0.25)
        );
        assert!(combine_maps(&one, &ControlMap::single("n", 0), Combine::Div).is_empty());
    }

    #[test]
    fn operator_spellings() {
        assert_eq!(Operator::from_symbol("#"), Some(Operator::new(Structure::Left, Combine::UnionRight)));
        assert_eq!(Operator::from_symbol("|+"), Some(Operator::new(Structure::Left, Combine::Add)));
        assert_eq!(Operator::from_symbol("+|"), Some(Operator::new(Structure::Right, Combine::Add)));
        assert_eq!(Operator::from_symbol("|*|"), Some(Operator::new(Structure::Both, Combine::Mul)));
        assert_eq!(Operator::from_symbol("|>"), None);
        assert_eq!(Operator::from_name("addboth"), Operator::from_symbol("|+|"));
        for op in Operator::all() {
            assert_eq!(Operator::from_symbol(&op.symbol()), Some(op));
            assert_eq!(Operator::from_name(&op.name()), Some(op));
        }
    }

    #[test]
    fn hash_merges_disjoint_keys() {
        let got = set(&sound(&pure("bd".to_string())), &pan(&pure(0.25))).query(&unit());
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].whole, Some(unit()));
        assert_eq!(got[0].value, map(&[("sound", "bd".into()), ("pan", 0.25.into())]));
    }

    #[test]
    fn add_left_on_pure() {
        let one = n(&pure(1i64));
        let got = Operator::from_symbol("|+").unwrap().apply(&one, &one).query(&unit());
        assert_eq!(got[0].value, ControlMap::single("n", 2));
    }

    #[test]
    fn jux_rev() {
        let p = sound(&fastcat(vec![pure("bd".to_string()), pure("sn".to_string())]));
        let got = jux(ControlPattern::rev, &p).query(&unit());
        let rows: Vec<_> = got
            .iter()
            .map(|e| {
                (
                    e.value.get("sound").unwrap().to_string(),
                    e.active.begin.clone(),
                    e.value.get("pan").unwrap().as_f64().unwrap(),
                )
            })
            .collect();
        let half = Fraction::new(1, 2);
        let zero = Fraction::zero();
        assert_eq!(
            rows,
            vec![
                ("bd".into(), zero.clone(), 0.0),
                ("sn".into(), zero, 1.0),
                ("sn".into(), half.clone(), 0.0),
                ("bd".into(), half, 1.0),
            ]
        );
        assert!(jux(ControlPattern::rev, &silence()).query(&unit()).is_empty());
    }

    #[test]
    fn json_values() {
        let m = map(&[("sound", "bd".into()), ("n", 3.into()), ("pan", 0.5.into())]);
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"sound":"bd","n":3,"pan":0.5}"#);
        let back: ControlMap = serde_json::from_str(r#"{"sound":"bd","n":3,"pan":0.5}"#).unwrap();
        assert_eq!(back, m);
    }
}
