//! A small pipeline language for building control patterns.
//!
//! ```text
//! expr    := operand (INFIX operand)* ;        -- left-associative, one precedence level
//! operand := NAME arg* | arg ;
//! arg     := NUMBER | STRING | NAME | '(' expr ')' ;
//! INFIX   := '|>' | '#' | '|+|' | '|+' | '+|' | ... ;
//! ```
//!
//! Strings are mini-notation. A call given one argument fewer than it needs
//! (the final pattern) is a transformation, usable after `|>` or as an
//! argument to `every` and `jux`:
//!
//! ```text
//! s "bd sn" |> every 2 rev |> fast "1 2"
//! n "0 3" |+| n "10 20 30" # s "superpiano"
//! jux (iter 4) (s "bd hh sn hh")
//! ```

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::controls::{ctrl, jux, ControlPattern, ControlValue, Operator};
use crate::diagnostic::ParseDiagnostic;
use crate::mini::parse_mini;
use crate::pattern::{pure, silence, stack, Pattern, Transform};
use crate::time::Fraction;

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    /// A double-quoted mini-notation string; `offset` is the byte offset of
    /// its first character inside the quotes.
    MiniPattern { src: String, offset: usize },
    Call {
        name: String,
        args: Vec<ExprAst>,
        offset: usize,
    },
    NumberLit { value: Fraction, offset: usize },
    Pipe {
        subject: Box<ExprAst>,
        transform: Box<ExprAst>,
    },
}

impl ExprAst {
    pub fn offset(&self) -> usize {
        match self {
            ExprAst::MiniPattern { offset, .. }
            | ExprAst::Call { offset, .. }
            | ExprAst::NumberLit { offset, .. } => *offset,
            ExprAst::Pipe { subject, .. } => subject.offset(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Number(Fraction),
    Str(String),
    LParen,
    RParen,
    Pipe,
    Op(Operator),
    Eof,
}

fn infix_symbols() -> Vec<(String, Tok)> {
    let mut syms: Vec<(String, Tok)> = Operator::all()
        .into_iter()
        .map(|op| (op.symbol(), Tok::Op(op)))
        .collect();
    syms.push(("|>".into(), Tok::Pipe));
    // Longest match first, so "|+|" wins over "|+".
    syms.sort_by_key(|(s, _)| std::cmp::Reverse(s.len()));
    syms
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseDiagnostic> {
    let bytes = src.as_bytes();
    let symbols = infix_symbols();
    let mut toks = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        match c {
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
                continue;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
                continue;
            }
            b'"' => {
                let Some(len) = src[i + 1..].find('"') else {
                    return Err(ParseDiagnostic::at(src, i, "unterminated string"));
                };
                toks.push((Tok::Str(src[i + 1..i + 1 + len].to_string()), i + 1));
                i += len + 2;
                continue;
            }
            _ => {}
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            toks.push((Tok::Name(src[start..i].to_string()), start));
            continue;
        }
        if c.is_ascii_digit() || (c == b'-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i += 1;
            let digits = |i: &mut usize| {
                while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                    *i += 1;
                }
            };
            digits(&mut i);
            if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                i += 1;
                digits(&mut i);
            }
            if matches!(bytes.get(i), Some(b'/' | b'%'))
                && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)
            {
                i += 1;
                digits(&mut i);
            }
            let text = &src[start..i];
            let value = text.parse::<Fraction>().map_err(|_| {
                ParseDiagnostic::at(src, start, format!("malformed number {text}"))
            })?;
            toks.push((Tok::Number(value), start));
            continue;
        }
        for (sym, tok) in &symbols {
            if src[i..].starts_with(sym.as_str()) {
                toks.push((tok.clone(), i));
                i += sym.len();
                continue 'outer;
            }
        }
        let ch = src[start..].chars().next().unwrap_or('?');
        return Err(ParseDiagnostic::at(src, start, format!("unexpected character {ch:?}")));
    }
    toks.push((Tok::Eof, src.len()));
    Ok(toks)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
}

const MAX_DEPTH: usize = 128;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self) -> Result<T, ParseDiagnostic> {
        let what = match self.peek() {
            Tok::Name(n) => format!("'{n}'"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Str(_) => "string".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Pipe => "'|>'".into(),
            Tok::Op(op) => format!("'{}'", op.symbol()),
            Tok::Eof => "end of input".into(),
        };
        Err(ParseDiagnostic::at(self.src, self.offset(), format!("unexpected {what}")))
    }

    fn expr(&mut self) -> Result<ExprAst, ParseDiagnostic> {
        let mut lhs = self.operand()?;
        loop {
            match self.peek().clone() {
                Tok::Pipe => {
                    self.bump();
                    let rhs = self.operand()?;
                    lhs = ExprAst::Pipe {
                        subject: Box::new(lhs),
                        transform: Box::new(rhs),
                    };
                }
                Tok::Op(op) => {
                    let (_, at) = self.bump();
                    let rhs = self.operand()?;
                    lhs = ExprAst::Call {
                        name: op.name(),
                        args: vec![lhs, rhs],
                        offset: at,
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn operand(&mut self) -> Result<ExprAst, ParseDiagnostic> {
        if let Tok::Name(name) = self.peek().clone() {
            let (_, at) = self.bump();
            let mut args = Vec::new();
            while let Some(arg) = self.arg()? {
                args.push(arg);
            }
            return Ok(ExprAst::Call {
                name,
                args,
                offset: at,
            });
        }
        match self.arg()? {
            Some(arg) => Ok(arg),
            None => self.unexpected(),
        }
    }

    fn arg(&mut self) -> Result<Option<ExprAst>, ParseDiagnostic> {
        let (tok, at) = (self.peek().clone(), self.offset());
        let node = match tok {
            Tok::Number(value) => ExprAst::NumberLit { value, offset: at },
            Tok::Str(src) => ExprAst::MiniPattern { src, offset: at },
            Tok::Name(name) => ExprAst::Call {
                name,
                args: Vec::new(),
                offset: at,
            },
            Tok::LParen => {
                self.bump();
                self.depth += 1;
                if self.depth > MAX_DEPTH {
                    return Err(ParseDiagnostic::at(self.src, at, "parentheses nested too deeply"));
                }
                let inner = self.expr()?;
                self.depth -= 1;
                if *self.peek() != Tok::RParen {
                    if *self.peek() == Tok::Eof {
                        return Err(ParseDiagnostic::at(self.src, at, "unclosed '('"));
                    }
                    return self.unexpected();
                }
                self.bump();
                return Ok(Some(inner));
            }
            _ => return Ok(None),
        };
        self.bump();
        Ok(Some(node))
    }
}

pub fn parse_expr(src: &str) -> Result<ExprAst, ParseDiagnostic> {
    let toks = lex(src)?;
    let mut parser = Parser {
        src,
        toks,
        pos: 0,
        depth: 0,
    };
    let ast = parser.expr()?;
    if *parser.peek() != Tok::Eof {
        return parser.unexpected();
    }
    Ok(ast)
}

/// An evaluation failure, naming the call it arose in.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct EvalDiagnostic {
    pub message: String,
    pub call: Option<String>,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(ParseDiagnostic),
    /// A mini-notation error; `inner` is positioned within the string whose
    /// content starts at byte `base` of the expression.
    #[error("{inner}")]
    Mini { base: usize, inner: ParseDiagnostic },
    #[error(transparent)]
    Eval(EvalDiagnostic),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagnosticKind {
    Parse,
    Eval,
}

/// A diagnostic positioned within the full expression source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::Parse => "parse error",
            DiagnosticKind::Eval => "error",
        };
        write!(f, "{kind} at {}:{}: {}", self.line, self.column, self.message)
    }
}

impl ExprError {
    pub fn locate(&self, src: &str) -> Diagnostic {
        let (kind, pos) = match self {
            ExprError::Parse(d) => (DiagnosticKind::Parse, ParseDiagnostic::at(src, d.offset, d.message.clone())),
            ExprError::Mini { base, inner } => (DiagnosticKind::Parse, inner.rebase(src, *base)),
            ExprError::Eval(e) => (DiagnosticKind::Eval, ParseDiagnostic::at(src, e.offset, e.message.clone())),
        };
        Diagnostic {
            kind,
            message: pos.message,
            line: pos.line,
            column: pos.column,
            offset: pos.offset,
        }
    }
}

/// Parse and evaluate in one step.
pub fn compile(src: &str) -> Result<ControlPattern, Diagnostic> {
    parse_expr(src)
        .map_err(ExprError::Parse)
        .and_then(|ast| eval_expr(&ast))
        .map_err(|e| e.locate(src))
}

#[derive(Clone)]
enum Value {
    Pattern(ControlPattern),
    Mini { src: String, offset: usize },
    Number { value: Fraction },
    Function(Transform<crate::controls::ControlMap>),
}

impl Value {
    fn describe(&self) -> &'static str {
        match self {
            Value::Pattern(_) => "a control pattern",
            Value::Mini { .. } => "a string",
            Value::Number { .. } => "a number",
            Value::Function(_) => "a function",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Param {
    /// Text values, e.g. sample names.
    Text,
    /// Numeric control values.
    Numeric,
    /// A literal string naming a control.
    Name,
    /// Mixed text or numeric control values.
    Any,
    /// A time amount, patternable.
    Amount,
    /// A positive whole number, patternable.
    Count,
    Function,
    Pattern,
}

impl Param {
    fn describe(self) -> &'static str {
        match self {
            Param::Text => "a string",
            Param::Numeric => "a number or string of numbers",
            Param::Name => "a control name string",
            Param::Any => "a string",
            Param::Amount => "a number or string of numbers",
            Param::Count => "a whole number or string of whole numbers",
            Param::Function => "a function",
            Param::Pattern => "a control pattern",
        }
    }
}

#[derive(Clone)]
enum Arg {
    Text(Pattern<String>),
    Values(Pattern<ControlValue>),
    Name(String),
    Amount(Numeric<Fraction>),
    Count(Numeric<i64>),
    Function(Transform<crate::controls::ControlMap>),
    Pattern(ControlPattern),
}

/// A literal number, or a pattern of numbers from a mini-notation string.
#[derive(Clone)]
enum Numeric<T> {
    Const(T),
    Patterned(Pattern<T>),
}

const CONTROLS: [&str; 5] = ["n", "note", "speed", "gain", "pan"];

fn signature(name: &str) -> Option<(Vec<Param>, bool)> {
    use Param::*;
    let fixed = |ps: &[Param]| Some((ps.to_vec(), false));
    match name {
        "s" | "sound" => fixed(&[Text]),
        _ if CONTROLS.contains(&name) => fixed(&[Numeric]),
        "ctrl" => fixed(&[Name, Any]),
        "silence" => fixed(&[]),
        "fast" | "slow" | "early" | "late" => fixed(&[Amount, Pattern]),
        "rev" => fixed(&[Pattern]),
        "iter" => fixed(&[Count, Pattern]),
        "every" => fixed(&[Count, Function, Pattern]),
        "jux" => fixed(&[Function, Pattern]),
        "stack" => Some((vec![Pattern], true)),
        _ if Operator::from_name(name).is_some() => fixed(&[Pattern, Pattern]),
        _ => None,
    }
}

/// Names callable from expressions.
pub fn function_names() -> Vec<String> {
    let mut names: Vec<String> = [
        "s", "sound", "n", "note", "speed", "gain", "pan", "ctrl", "silence", "fast", "slow",
        "early", "late", "rev", "iter", "every", "jux", "stack",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    names.extend(Operator::all().into_iter().map(Operator::name));
    names
}

struct Evaluator;

impl Evaluator {
    fn eval(&self, ast: &ExprAst) -> Result<Value, ExprError> {
        match ast {
            ExprAst::MiniPattern { src, offset } => Ok(Value::Mini {
                src: src.clone(),
                offset: *offset,
            }),
            ExprAst::NumberLit { value, .. } => Ok(Value::Number {
                value: value.clone(),
            }),
            ExprAst::Pipe { subject, transform } => {
                let subject_value = self.eval(subject)?;
                let Value::Pattern(pat) = subject_value else {
                    return Err(eval_error(
                        format!("'|>' needs a control pattern on its left, got {}", subject_value.describe()),
                        None,
                        subject.offset(),
                    ));
                };
                match self.eval(transform)? {
                    Value::Function(f) => Ok(Value::Pattern(f(&pat))),
                    other => Err(eval_error(
                        format!("'|>' needs a function on its right, got {}", other.describe()),
                        call_name(transform),
                        transform.offset(),
                    )),
                }
            }
            ExprAst::Call { name, args, offset } => {
                let values = args
                    .iter()
                    .map(|a| self.eval(a))
                    .collect::<Result<Vec<_>, _>>()?;
                self.call(name, values, args, *offset)
            }
        }
    }

    fn call(&self, name: &str, values: Vec<Value>, asts: &[ExprAst], at: usize) -> Result<Value, ExprError> {
        let Some((params, variadic)) = signature(name) else {
            return Err(eval_error(format!("unknown function '{name}'"), Some(name), at));
        };
        let given = values.len();
        if variadic {
            if given == 0 {
                return Err(eval_error(
                    format!("{name} expects at least 1 argument, got 0"),
                    Some(name),
                    at,
                ));
            }
            let args = values
                .into_iter()
                .zip(asts)
                .map(|(v, a)| convert(v, params[0], name, a.offset()))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Value::Pattern(apply(name, args)));
        }
        let partial = given + 1 == params.len() && params.last() == Some(&Param::Pattern);
        if given != params.len() && !partial {
            let plural = if params.len() == 1 { "" } else { "s" };
            return Err(eval_error(
                format!("{name} expects {} argument{plural}, got {given}", params.len()),
                Some(name),
                at,
            ));
        }
        let args = values
            .into_iter()
            .zip(asts)
            .zip(&params)
            .map(|((v, a), p)| convert(v, *p, name, a.offset()))
            .collect::<Result<Vec<_>, _>>()?;
        if partial {
            let name = name.to_string();
            Ok(Value::Function(Arc::new(move |pat: &ControlPattern| {
                let mut full = args.clone();
                full.push(Arg::Pattern(pat.clone()));
                apply(&name, full)
            })))
        } else {
            Ok(Value::Pattern(apply(name, args)))
        }
    }
}

fn call_name(ast: &ExprAst) -> Option<&str> {
    match ast {
        ExprAst::Call { name, .. } => Some(name),
        _ => None,
    }
}

fn eval_error(message: String, call: Option<&str>, offset: usize) -> ExprError {
    ExprError::Eval(EvalDiagnostic {
        message,
        call: call.map(str::to_string),
        offset,
    })
}

fn mini_pattern(src: &str, offset: usize) -> Result<(Pattern<String>, Vec<String>), ExprError> {
    let rhythm = parse_mini(src).map_err(|inner| ExprError::Mini { base: offset, inner })?;
    let atoms = rhythm.atoms().into_iter().cloned().collect();
    Ok((rhythm.to_pattern(), atoms))
}

fn control_value(atom: &str) -> ControlValue {
    if let Ok(i) = atom.parse::<i64>() {
        ControlValue::Int(i)
    } else if let Ok(x) = atom.parse::<Fraction>() {
        ControlValue::Float(x.to_f64())
    } else {
        ControlValue::Text(atom.to_string())
    }
}

fn number_value(value: &Fraction) -> ControlValue {
    match (value.is_integer(), i64::try_from(value.numer())) {
        (true, Ok(i)) => ControlValue::Int(i),
        _ => ControlValue::Float(value.to_f64()),
    }
}

fn convert(value: Value, param: Param, call: &str, at: usize) -> Result<Arg, ExprError> {
    let mismatch = |value: &Value| {
        Err(eval_error(
            format!("{call} expects {}, got {}", param.describe(), value.describe()),
            Some(call),
            at,
        ))
    };
    let bad_atom = |atom: &str, want: &str| {
        Err(eval_error(
            format!("{call} expects {want}, got '{atom}'"),
            Some(call),
            at,
        ))
    };
    match (param, value) {
        (Param::Pattern, Value::Pattern(p)) => Ok(Arg::Pattern(p)),
        (Param::Function, Value::Function(f)) => Ok(Arg::Function(f)),
        (Param::Text, Value::Mini { src, offset }) => Ok(Arg::Text(mini_pattern(&src, offset)?.0)),
        (Param::Name, Value::Mini { src, .. }) => {
            if src.trim().is_empty() || src.trim().contains(char::is_whitespace) {
                return bad_atom(&src, "a single control name");
            }
            Ok(Arg::Name(src.trim().to_string()))
        }
        (Param::Any, Value::Mini { src, offset }) => {
            let (pat, _) = mini_pattern(&src, offset)?;
            Ok(Arg::Values(pat.with_value(|a| control_value(&a))))
        }
        (Param::Numeric | Param::Any, Value::Number { value, .. }) => {
            Ok(Arg::Values(pure(number_value(&value))))
        }
        (Param::Numeric, Value::Mini { src, offset }) => {
            let (pat, atoms) = mini_pattern(&src, offset)?;
            if let Some(bad) = atoms.iter().find(|a| control_value(a).as_f64().is_none()) {
                return bad_atom(bad, "numbers");
            }
            Ok(Arg::Values(pat.with_value(|a| control_value(&a))))
        }
        (Param::Amount, Value::Number { value, .. }) => Ok(Arg::Amount(Numeric::Const(value))),
        (Param::Amount, Value::Mini { src, offset }) => {
            let (pat, atoms) = mini_pattern(&src, offset)?;
            if let Some(bad) = atoms.iter().find(|a| a.parse::<Fraction>().is_err()) {
                return bad_atom(bad, "numbers");
            }
            Ok(Arg::Amount(Numeric::Patterned(
                pat.with_value(|a| a.parse::<Fraction>().unwrap_or_default()),
            )))
        }
        (Param::Count, Value::Number { value, .. }) => match whole_number(&value) {
            Some(n) => Ok(Arg::Count(Numeric::Const(n))),
            None => bad_atom(&display_number(&value), "a positive whole number"),
        },
        (Param::Count, Value::Mini { src, offset }) => {
            let (pat, atoms) = mini_pattern(&src, offset)?;
            if let Some(bad) = atoms.iter().find(|a| a.parse::<i64>().ok().filter(|n| *n > 0).is_none()) {
                return bad_atom(bad, "positive whole numbers");
            }
            Ok(Arg::Count(Numeric::Patterned(
                pat.with_value(|a| a.parse::<i64>().unwrap_or(1)),
            )))
        }
        (_, v) => mismatch(&v),
    }
}

fn display_number(value: &Fraction) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        value.to_string()
    }
}

fn whole_number(value: &Fraction) -> Option<i64> {
    if !value.is_integer() {
        return None;
    }
    i64::try_from(value.numer()).ok().filter(|n| *n > 0)
}

/// Apply a registered function to converted arguments. Arity and types
/// were checked by the caller.
fn apply(name: &str, args: Vec<Arg>) -> ControlPattern {
    let mut it = args.into_iter();
    let mut next = || it.next().expect("arity checked");
    macro_rules! take {
        ($variant:ident) => {
            match next() {
                Arg::$variant(x) => x,
                _ => unreachable!("types checked"),
            }
        };
    }
    match name {
        "s" | "sound" => ctrl("sound", &take!(Text)),
        "ctrl" => {
            let key = take!(Name);
            ctrl(&key, &take!(Values))
        }
        "silence" => silence(),
        "fast" => {
            let amount = take!(Amount);
            let pat = take!(Pattern);
            match amount {
                Numeric::Const(x) => pat.fast(&x),
                Numeric::Patterned(xs) => pat.fast_p(&xs),
            }
        }
        "slow" => {
            let amount = take!(Amount);
            let pat = take!(Pattern);
            match amount {
                Numeric::Const(x) => pat.slow(&x),
                Numeric::Patterned(xs) => pat.slow_p(&xs),
            }
        }
        "early" => {
            let amount = take!(Amount);
            let pat = take!(Pattern);
            match amount {
                Numeric::Const(x) => pat.early(&x),
                Numeric::Patterned(xs) => pat.early_p(&xs),
            }
        }
        "late" => {
            let amount = take!(Amount);
            let pat = take!(Pattern);
            match amount {
                Numeric::Const(x) => pat.late(&x),
                Numeric::Patterned(xs) => pat.late_p(&xs),
            }
        }
        "rev" => take!(Pattern).rev(),
        "iter" => {
            let count = take!(Count);
            let pat = take!(Pattern);
            match count {
                Numeric::Const(n) => pat.iter(n),
                Numeric::Patterned(ns) => pat.iter_p(&ns),
            }
        }
        "every" => {
            let count = take!(Count);
            let f = take!(Function);
            let pat = take!(Pattern);
            match count {
                Numeric::Const(n) => pat.every(n, move |p| f(p)),
                Numeric::Patterned(ns) => pat.every_p(&ns, f),
            }
        }
        "jux" => {
            let f = take!(Function);
            jux(|p| f(p), &take!(Pattern))
        }
        "stack" => {
            let mut pats = Vec::new();
            for arg in it {
                if let Arg::Pattern(p) = arg {
                    pats.push(p);
                }
            }
            stack(pats)
        }
        _ if CONTROLS.contains(&name) => ctrl(name, &take!(Values)),
        _ => {
            let op = Operator::from_name(name).expect("registered operator");
            let left = take!(Pattern);
            op.apply(&left, &take!(Pattern))
        }
    }
}

pub fn eval_expr(ast: &ExprAst) -> Result<ControlPattern, ExprError> {
    match Evaluator.eval(ast)? {
        Value::Pattern(p) => Ok(p),
        other => {
            let hint = match &other {
                Value::Function(_) => " (is an argument missing?)",
                Value::Mini { .. } => " (wrap strings with s, n, note, ...)",
                _ => "",
            };
            Err(eval_error(
                format!("expression evaluates to {}, not a control pattern{hint}", other.describe()),
                call_name(ast),
                ast.offset(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controls::{n, set, sound, ControlMap};
    use crate::pattern::fastcat;
    use crate::time::Span;

    fn call(name: &str, args: Vec<ExprAst>, offset: usize) -> ExprAst {
        ExprAst::Call {
            name: name.into(),
            args,
            offset,
        }
    }

    fn mini(src: &str, offset: usize) -> ExprAst {
        ExprAst::MiniPattern {
            src: src.into(),
            offset,
        }
    }

    fn num(v: i64, offset: usize) -> ExprAst {
        ExprAst::NumberLit {
            value: Fraction::integer(v),
            offset,
        }
    }

    fn words(src: &str) -> Pattern<String> {
        fastcat(src.split(' ').map(|w| pure(w.to_string())).collect())
    }

    fn err(src: &str) -> Diagnostic {
        compile(src).map(|_| ()).unwrap_err()
    }

    #[test]
    fn parse_pipe() {
        assert_eq!(
            parse_expr(r#"s "bd sn" |> fast 2"#).unwrap(),
            ExprAst::Pipe {
                subject: Box::new(call("s", vec![mini("bd sn", 3)], 0)),
                transform: Box::new(call("fast", vec![num(2, 18)], 13)),
            }
        );
    }

    #[test]
    fn parse_bare_name_argument() {
        assert_eq!(
            parse_expr(r#"jux rev (s "bd sn")"#).unwrap(),
            call(
                "jux",
                vec![call("rev", vec![], 4), call("s", vec![mini("bd sn", 12)], 9)],
                0
            )
        );
    }

    #[test]
    fn parse_infix_is_left_associative() {
        let ast = parse_expr(r#"n "1" |+| n "2" # s "x""#).unwrap();
        let ExprAst::Call { name, args, .. } = ast else { panic!() };
        assert_eq!(name, "setleft");
        assert!(matches!(&args[0], ExprAst::Call { name, .. } if name == "addboth"));
    }

    #[test]
    fn arity_is_checked_at_eval() {
        let ast = parse_expr("fast").unwrap();
        assert_eq!(ast, call("fast", vec![], 0));
        let ExprError::Eval(e) = eval_expr(&ast).map(|_| ()).unwrap_err() else { panic!() };
        assert_eq!(e.message, "fast expects 2 arguments, got 0");
        assert_eq!(e.call.as_deref(), Some("fast"));
    }

    #[test]
    fn parse_errors() {
        let e = err(r#"s "bd"#);
        assert_eq!((e.kind, e.message.as_str(), e.offset), (DiagnosticKind::Parse, "unterminated string", 2));
        assert_eq!(err(")").message, "unexpected ')'");
        assert_eq!(err("(s \"a\"").message, "unclosed '('");
        assert_eq!(err("s \"a\" |>").message, "unexpected end of input");
        assert_eq!(err("s $").message, "unexpected character '$'");
    }

    #[test]
    fn eval_errors_name_the_call() {
        assert_eq!(err("wobble 2").message, "unknown function 'wobble'");
        assert_eq!(err("rev 2").message, "rev expects a control pattern, got a number");
        assert_eq!(err(r#"n "1 bd""#).message, "n expects numbers, got 'bd'");
        assert_eq!(err(r#"s "bd" |> every 0 rev"#).message, "every expects a positive whole number, got '0'");
        assert_eq!(err(r#"s "bd" |> s "sn""#).message, "'|>' needs a function on its right, got a control pattern");
        assert_eq!(err(r#""bd sn""#).kind, DiagnosticKind::Eval);
        assert!(err("fast 2").message.contains("is an argument missing?"));
    }

    #[test]
    fn mini_errors_are_rebased() {
        let e = err(r#"s "bd [sn""#);
        assert_eq!((e.kind, e.message.as_str(), e.offset), (DiagnosticKind::Parse, "unclosed '['", 6));
    }

    #[test]
    fn simple_sequence() {
        let got = compile(r#"s "bd sn""#).unwrap().query(&Span::new(0, 1));
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].value, ControlMap::single("sound", "bd"));
        assert_eq!(got[1].active, Span::new(Fraction::new(1, 2), Fraction::one()));
    }

    #[test]
    fn matches_library_calls() {
        let s = Span::new(0, 4);
        let cases: Vec<(&str, ControlPattern)> = vec![
            (r#"s "bd sn" |> rev"#, sound(&words("bd sn")).rev()),
            (r#"rev (s "bd sn")"#, sound(&words("bd sn")).rev()),
            (r#"s "a b c" |> every 2 (fast 2)"#, sound(&words("a b c")).every(2, |p| p.fast(&Fraction::integer(2)))),
            (r#"s "a b c d" |> iter 4"#, sound(&words("a b c d")).iter(4)),
            (r#"s "a" # n 3"#, set(&sound(&words("a")), &n(&pure(3i64)))),
            (r#"s "a b" |> late 0.25"#, sound(&words("a b")).late(&Fraction::new(1, 4))),
            (r#"s "a b" |> early 1/3"#, sound(&words("a b")).early(&Fraction::new(1, 3))),
            (r#"s "a b" |> slow 2"#, sound(&words("a b")).slow(&Fraction::integer(2))),
            (r#"stack (s "a") (s "b c")"#, stack(vec![sound(&words("a")), sound(&words("b c"))])),
            (r#"jux rev (s "a b")"#, jux(ControlPattern::rev, &sound(&words("a b")))),
            (r#"ctrl "cutoff" "100 200""#, ctrl("cutoff", &fastcat(vec![pure(100i64), pure(200)]))),
            ("silence", silence()),
        ];
        for (src, expected) in cases {
            assert_eq!(compile(src).unwrap().query(&s), expected.query(&s), "{src}");
        }
    }

    #[test]
    fn numeric_literals_become_ints_or_floats() {
        let got = compile(r#"n "1 2.5" # gain 1"#).unwrap().query(&Span::new(0, 1));
        assert_eq!(got[0].value.get("n"), Some(&ControlValue::Int(1)));
        assert_eq!(got[1].value.get("n"), Some(&ControlValue::Float(2.5)));
        assert_eq!(got[1].value.get("gain"), Some(&ControlValue::Int(1)));
    }

    #[test]
    fn partial_operator_as_transform() {
        let s = Span::new(0, 1);
        let a = compile(r#"n "1 2" |> addboth (n "10 20 30")"#).unwrap().query(&s);
        let b = compile(r#"n "1 2" |+| n "10 20 30""#).unwrap().query(&s);
        assert_eq!(a, b);
    }
}
