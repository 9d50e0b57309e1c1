use std::fmt;

use serde::{Deserialize, Serialize};

/// A message tied to a position in some source text. `offset` is a byte
/// offset; `line` and `column` are 1-based, with columns counted in
/// characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub struct ParseDiagnostic {
    pub message: String,
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl ParseDiagnostic {
    /// Position `message` at byte `offset` of `src`. Offsets past the end
    /// are clamped; offsets inside a character snap back to its start.
    pub fn at(src: &str, offset: usize, message: impl Into<String>) -> Self {
        let mut offset = offset.min(src.len());
        while !src.is_char_boundary(offset) {
            offset -= 1;
        }
        let before = &src[..offset];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let column = src[line_start..offset].chars().count() + 1;
        ParseDiagnostic {
            message: message.into(),
            line,
            column,
            offset,
        }
    }

    /// Shift into an enclosing source, where this diagnostic's source began
    /// at byte `base`.
    pub fn rebase(&self, outer: &str, base: usize) -> Self {
        ParseDiagnostic::at(outer, base + self.offset, self.message.clone())
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}
