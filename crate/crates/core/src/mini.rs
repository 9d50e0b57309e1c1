//! Mini-notation: a terse text syntax for sequences, parsed to [`Rhythm`].
//!
//! ```text
//! sequence  := lane (',' lane)* ;
//! lane      := step+ ;
//! step      := term postfix* | '_' ;
//! term      := WORD | NUMBER | '~' | '[' sequence ']' | '<' lane '>' | '{' sequence '}' percent? ;
//! postfix   := '*' RATIONAL | '/' RATIONAL | '!' INT | '@' RATIONAL ;
//! percent   := '%' INT ;
//! ```
//!
//! Lanes separated by `,` stack cycle-wise inside `[]` (and at top level)
//! and step-wise inside `{}`. `<a b c>` plays one step per cycle.

use crate::diagnostic::ParseDiagnostic;
use crate::rhythm::{PatternFunction, Rhythm, Step};
use crate::time::Fraction;

const MAX_DEPTH: usize = 128;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Number(String),
    Tilde,
    Underscore,
    Open(char),
    Close(char),
    Comma,
    Star,
    Slash,
    Bang,
    At,
    Percent,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("'{w}'"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Tilde => "'~'".into(),
            Tok::Underscore => "'_'".into(),
            Tok::Open(c) | Tok::Close(c) => format!("'{c}'"),
            Tok::Comma => "','".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Bang => "'!'".into(),
            Tok::At => "'@'".into(),
            Tok::Percent => "'%'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '\'' | '#' | '.' | '_' | '-')
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseDiagnostic> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '~' => Some(Tok::Tilde),
            '_' => Some(Tok::Underscore),
            '[' | '<' | '{' => Some(Tok::Open(c)),
            ']' | '>' | '}' => Some(Tok::Close(c)),
            ',' => Some(Tok::Comma),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '!' => Some(Tok::Bang),
            '@' => Some(Tok::At),
            '%' => Some(Tok::Percent),
            _ => None,
        };
        if let Some(tok) = single {
            toks.push((tok, start));
            i += 1;
        } else if c.is_ascii_alphabetic() {
            // '_' is a token of its own, so it never continues a word.
            while i < bytes.len() && is_word_char(bytes[i] as char) && bytes[i] != b'_' {
                i += 1;
            }
            toks.push((Tok::Word(src[start..i].to_string()), start));
        } else if c.is_ascii_digit()
            || (c == '-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit))
        {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if bytes.get(i) == Some(&b'.') {
                if !bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                    return Err(ParseDiagnostic::at(src, i, "expected digits after '.'"));
                }
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if let Some(&next) = bytes.get(i) {
                if is_word_char(next as char) && next != b'_' {
                    return Err(ParseDiagnostic::at(
                        src,
                        i,
                        format!("unexpected {:?} after number", next as char),
                    ));
                }
            }
            toks.push((Tok::Number(src[start..i].to_string()), start));
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(ParseDiagnostic::at(src, start, format!("unexpected character {ch:?}")));
        }
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

type Lane = Vec<Step<String>>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, offset: usize, msg: impl Into<String>) -> Result<T, ParseDiagnostic> {
        Err(ParseDiagnostic::at(self.src, offset, msg))
    }

    fn unexpected<T>(&self) -> Result<T, ParseDiagnostic> {
        self.error(self.offset(), format!("unexpected {}", self.peek().describe()))
    }

    fn at_lane_end(&self) -> bool {
        matches!(self.peek(), Tok::Comma | Tok::Close(_) | Tok::Eof)
    }

    /// Lanes up to (not including) the closing token or end of input.
    fn sequence(&mut self) -> Result<Vec<Lane>, ParseDiagnostic> {
        let mut lanes = vec![self.lane()?];
        while *self.peek() == Tok::Comma {
            self.next();
            lanes.push(self.lane()?);
        }
        Ok(lanes)
    }

    fn lane(&mut self) -> Result<Lane, ParseDiagnostic> {
        let mut steps: Lane = Vec::new();
        if self.at_lane_end() {
            return self.error(self.offset(), format!("expected a step, found {}", self.peek().describe()));
        }
        while !self.at_lane_end() {
            if *self.peek() == Tok::Underscore {
                let (_, at) = self.next();
                match steps.last_mut() {
                    Some(last) => last.weight = &last.weight + Fraction::one(),
                    None => return self.error(at, "'_' has no step to extend"),
                }
                continue;
            }
            let (step, repeat) = self.step()?;
            for _ in 1..repeat {
                steps.push(step.clone());
            }
            steps.push(step);
        }
        Ok(steps)
    }

    fn step(&mut self) -> Result<(Step<String>, usize), ParseDiagnostic> {
        let mut rhythm = self.term()?;
        let mut weight = Fraction::one();
        let mut repeat = 1usize;
        loop {
            match self.peek() {
                Tok::Star => {
                    let (_, at) = self.next();
                    let factor = self.positive_rational(at, "'*'")?;
                    rhythm = Rhythm::patterning(PatternFunction::fast(factor), rhythm);
                }
                Tok::Slash => {
                    let (_, at) = self.next();
                    let factor = self.positive_rational(at, "'/'")?;
                    rhythm = Rhythm::patterning(PatternFunction::slow(factor), rhythm);
                }
                Tok::At => {
                    let (_, at) = self.next();
                    weight = self.positive_rational(at, "'@'")?;
                }
                Tok::Bang => {
                    let (_, at) = self.next();
                    let count = self.positive_int(at, "'!'")?;
                    repeat = repeat.saturating_mul(count);
                    if repeat > 4096 {
                        return self.error(at, "too many repetitions");
                    }
                }
                _ => break,
            }
        }
        Ok((Step::weighted(weight, rhythm), repeat))
    }

    fn term(&mut self) -> Result<Rhythm<String>, ParseDiagnostic> {
        if !matches!(self.peek(), Tok::Word(_) | Tok::Number(_) | Tok::Tilde | Tok::Open(_)) {
            return self.unexpected();
        }
        let (tok, at) = self.next();
        match tok {
            Tok::Word(w) | Tok::Number(w) => Ok(Rhythm::Atom(w)),
            Tok::Tilde => Ok(Rhythm::Silence),
            Tok::Open(open) => {
                self.depth += 1;
                if self.depth > MAX_DEPTH {
                    return self.error(at, "brackets nested too deeply");
                }
                let r = self.bracketed(open, at);
                self.depth -= 1;
                r
            }
            _ => unreachable!("checked above"),
        }
    }

    fn bracketed(&mut self, open: char, at: usize) -> Result<Rhythm<String>, ParseDiagnostic> {
        let close = match open {
            '[' => ']',
            '<' => '>',
            _ => '}',
        };
        if *self.peek() == Tok::Close(close) && open != '[' {
            return self.error(at, format!("empty '{open}{close}'"));
        }
        let lanes = self.sequence()?;
        match self.peek() {
            Tok::Close(c) if *c == close => {
                self.next();
            }
            Tok::Eof => return self.error(at, format!("unclosed '{open}'")),
            _ => return self.unexpected(),
        }
        match open {
            '[' => Ok(cycle_stack(lanes)),
            '<' => {
                if lanes.len() > 1 {
                    return self.error(at, "',' is not supported inside '<>'");
                }
                let seq = Rhythm::Subsequence(lanes.into_iter().next().unwrap_or_default());
                let n = seq.step_count();
                Ok(Rhythm::patterning(PatternFunction::slow(n), seq))
            }
            _ => {
                let per_cycle = if *self.peek() == Tok::Percent {
                    let (_, p) = self.next();
                    Fraction::integer(self.positive_int(p, "'%'")? as i64)
                } else {
                    lanes
                        .first()
                        .map(|l| l.iter().fold(Fraction::zero(), |acc, s| acc + &s.weight))
                        .unwrap_or_else(Fraction::one)
                };
                Ok(Rhythm::StackSteps {
                    per_cycle,
                    rhythms: lanes.into_iter().map(Rhythm::Subsequence).collect(),
                })
            }
        }
    }

    fn number_token(&mut self, op_at: usize, op: &str, what: &str) -> Result<String, ParseDiagnostic> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.next();
                Ok(n)
            }
            _ => self.error(op_at, format!("{op} expects {what}")),
        }
    }

    fn positive_rational(&mut self, op_at: usize, op: &str) -> Result<Fraction, ParseDiagnostic> {
        let num_at = self.offset();
        let text = self.number_token(op_at, op, "a number")?;
        let mut value: Fraction = text
            .parse()
            .or_else(|_| self.error(num_at, format!("malformed number {text}")))?;
        if *self.peek() == Tok::Percent {
            let (_, p) = self.next();
            let den = self.positive_int(p, "'%'")?;
            value = value / Fraction::integer(den as i64);
        }
        if !value.is_positive() {
            return self.error(num_at, format!("{op} expects a positive number"));
        }
        Ok(value)
    }

    fn positive_int(&mut self, op_at: usize, op: &str) -> Result<usize, ParseDiagnostic> {
        let num_at = self.offset();
        let text = self.number_token(op_at, op, "a positive integer")?;
        match text.parse::<usize>() {
            Ok(n) if n > 0 && n <= 1 << 20 => Ok(n),
            _ => self.error(num_at, format!("{op} expects a positive integer, got {text}")),
        }
    }
}

fn cycle_stack(lanes: Vec<Lane>) -> Rhythm<String> {
    if lanes.len() == 1 {
        Rhythm::Subsequence(lanes.into_iter().next().unwrap_or_default())
    } else {
        Rhythm::StackCycles(lanes.into_iter().map(Rhythm::Subsequence).collect())
    }
}

/// Parse mini-notation. Atoms, including numbers, are kept as text.
pub fn parse_mini(src: &str) -> Result<Rhythm<String>, ParseDiagnostic> {
    let toks = lex(src)?;
    let mut parser = Parser {
        src,
        toks,
        pos: 0,
        depth: 0,
    };
    let lanes = parser.sequence()?;
    if *parser.peek() != Tok::Eof {
        return parser.unexpected();
    }
    Ok(cycle_stack(lanes))
}
