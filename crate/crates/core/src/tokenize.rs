//! Text ⇄ token stream.
//!
//! Canonical text: two uppercase hex digits per unit, single spaces
//! between units, `" | "` between measures, one musical line per text
//! line, final newline. The reader also accepts the quoted style
//! `"00", "24", "7F"` and lowercase digits. Blank text lines are skipped;
//! a line holding only delimiters is kept as an empty musical line so the
//! validator can report it.

use crate::error::{HnoteError, Result};
use crate::token::{TokenCode, UNITS_PER_MEASURE};

/// Units of one musical line, in order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenLine {
    pub codes: Vec<TokenCode>,
}

/// A tokenized but not yet validated document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    lines: Vec<TokenLine>,
}

/// A lexeme that is not a two-digit hex pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadLexeme {
    /// Musical line index (0-based).
    pub line: usize,
    /// Position among the lexemes of its line (0-based).
    pub index: usize,
    /// Character column in the source line (1-based).
    pub column: usize,
    pub lexeme: String,
}

impl TokenStream {
    pub fn new(lines: Vec<TokenLine>) -> Self {
        TokenStream { lines }
    }

    pub fn from_codes<I, L>(lines: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: IntoIterator<Item = TokenCode>,
    {
        TokenStream {
            lines: lines
                .into_iter()
                .map(|l| TokenLine {
                    codes: l.into_iter().collect(),
                })
                .collect(),
        }
    }

    pub fn lines(&self) -> &[TokenLine] {
        &self.lines
    }

    pub fn into_lines(self) -> Vec<TokenLine> {
        self.lines
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Total number of units across all lines.
    pub fn unit_count(&self) -> usize {
        self.lines.iter().map(|l| l.codes.len()).sum()
    }

    /// `(line index, code)` pairs in document order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, TokenCode)> + '_ {
        self.lines
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.codes.iter().map(move |&c| (i, c)))
    }

    /// All codes with line structure dropped; the metric token stream.
    pub fn flat(&self) -> Vec<TokenCode> {
        self.iter().map(|(_, c)| c).collect()
    }

    /// Canonical text. Every 32 units close a measure; a trailing partial
    /// measure is written as-is, so invalid streams serialize too.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.unit_count() * 3 + self.lines.len());
        for line in &self.lines {
            for (i, code) in line.codes.iter().enumerate() {
                if i > 0 {
                    out.push_str(if i % UNITS_PER_MEASURE == 0 {
                        " | "
                    } else {
                        " "
                    });
                }
                out.push_str(&code.to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn is_separator(c: char) -> bool {
    c.is_whitespace() || matches!(c, ',' | '"' | '\'' | '|' | '[' | ']')
}

/// Tokenizes a document, collecting every malformed lexeme instead of
/// stopping at the first. Malformed lexemes are left out of the stream.
pub fn tokenize_lenient(text: &str) -> (TokenStream, Vec<BadLexeme>) {
    let mut lines = Vec::new();
    let mut bad = Vec::new();
    for raw in text.lines() {
        if raw.trim().is_empty() {
            continue;
        }
        let line_idx = lines.len();
        let mut codes = Vec::new();
        let mut index = 0;
        let mut chars = raw.char_indices().peekable();
        let mut column = 0usize;
        while let Some((start, c)) = chars.next() {
            column += 1;
            if is_separator(c) {
                continue;
            }
            let start_col = column;
            let mut end = start + c.len_utf8();
            while let Some(&(i, c)) = chars.peek() {
                if is_separator(c) {
                    break;
                }
                end = i + c.len_utf8();
                column += 1;
                chars.next();
            }
            let lexeme = &raw[start..end];
            match lexeme.parse::<TokenCode>() {
                Ok(code) => codes.push(code),
                Err(_) => bad.push(BadLexeme {
                    line: line_idx,
                    index,
                    column: start_col,
                    lexeme: lexeme.to_string(),
                }),
            }
            index += 1;
        }
        lines.push(TokenLine { codes });
    }
    (TokenStream { lines }, bad)
}

/// Tokenizes a document, failing on the first malformed lexeme.
pub fn tokenize(text: &str) -> Result<TokenStream> {
    let (stream, bad) = tokenize_lenient(text);
    match bad.into_iter().next() {
        None => Ok(stream),
        Some(b) => Err(HnoteError::InvalidToken {
            line: b.line,
            column: b.column,
            lexeme: b.lexeme,
        }),
    }
}
