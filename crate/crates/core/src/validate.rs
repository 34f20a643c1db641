//! Structural validation of HNote token streams.
//!
//! Validation reports every failure it finds rather than stopping at the
//! first one, so that batches of generated pieces can be summarized by
//! error category.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::token::UNITS_PER_MEASURE;
use crate::tokenize::{tokenize_lenient, TokenStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ErrorCategory {
    /// A lexeme that is not a two-digit hex pair.
    InvalidToken,
    /// A line whose unit count is not a positive multiple of 32.
    IncompleteMeasure,
    /// A continuation not preceded by its onset or by itself.
    OrphanContinuation,
    /// A line with no units at all.
    EmptyLine,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 4] = [
        ErrorCategory::InvalidToken,
        ErrorCategory::IncompleteMeasure,
        ErrorCategory::OrphanContinuation,
        ErrorCategory::EmptyLine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::InvalidToken => "InvalidToken",
            ErrorCategory::IncompleteMeasure => "IncompleteMeasure",
            ErrorCategory::OrphanContinuation => "OrphanContinuation",
            ErrorCategory::EmptyLine => "EmptyLine",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Position {
    Unit {
        line: usize,
        measure: usize,
        unit: usize,
    },
    EndOfStream,
}

impl Position {
    fn at(line: usize, index: usize) -> Self {
        Position::Unit {
            line,
            measure: index / UNITS_PER_MEASURE,
            unit: index % UNITS_PER_MEASURE,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Unit {
                line,
                measure,
                unit,
            } => write!(f, "line {line}, measure {measure}, unit {unit}"),
            Position::EndOfStream => f.write_str("end of stream"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub position: Position,
    pub category: ErrorCategory,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.position, self.category, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    errors: Vec<ValidationError>,
}

impl ValidationReport {
    pub fn from_errors(errors: Vec<ValidationError>) -> Self {
        ValidationReport { errors }
    }

    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn errors(&self) -> &[ValidationError] {
        &self.errors
    }

    /// Distinct categories present, in taxonomy order.
    pub fn categories(&self) -> BTreeSet<ErrorCategory> {
        self.errors.iter().map(|e| e.category).collect()
    }

    pub fn has(&self, category: ErrorCategory) -> bool {
        self.errors.iter().any(|e| e.category == category)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.errors.as_slice() {
            [] => f.write_str("valid"),
            [only] => write!(f, "{only}"),
            [first, rest @ ..] => write!(f, "{first} (+{} more)", rest.len()),
        }
    }
}

/// Checks every line of `stream` against the fixed-measure grammar.
pub fn validate(stream: &TokenStream) -> ValidationReport {
    let mut errors = Vec::new();
    if stream.is_empty() {
        errors.push(ValidationError {
            position: Position::EndOfStream,
            category: ErrorCategory::IncompleteMeasure,
            message: "document contains no units".into(),
        });
    }
    for (line_idx, line) in stream.lines().iter().enumerate() {
        let codes = &line.codes;
        if codes.is_empty() {
            errors.push(ValidationError {
                position: Position::at(line_idx, 0),
                category: ErrorCategory::EmptyLine,
                message: "line has no units".into(),
            });
            continue;
        }
        for (i, &code) in codes.iter().enumerate() {
            if code.is_onset() {
                continue;
            }
            let message = match i.checked_sub(1).map(|p| codes[p]) {
                None => format!("line begins with continuation {code}"),
                Some(prev) if code.may_follow(prev) => continue,
                Some(prev) => format!(
                    "continuation {code} follows {prev}; expected {} or {code}",
                    code.onset_code()
                ),
            };
            errors.push(ValidationError {
                position: Position::at(line_idx, i),
                category: ErrorCategory::OrphanContinuation,
                message,
            });
        }
        let rem = codes.len() % UNITS_PER_MEASURE;
        if rem != 0 {
            errors.push(ValidationError {
                position: Position::at(line_idx, codes.len()),
                category: ErrorCategory::IncompleteMeasure,
                message: format!(
                    "final measure has {rem} of {UNITS_PER_MEASURE} units ({} units on line)",
                    codes.len()
                ),
            });
        }
    }
    ValidationReport { errors }
}

/// Tokenizes and validates raw text. Malformed lexemes become
/// `InvalidToken` errors; when any are present the structural checks are
/// skipped, since the unit positions after a bad lexeme are unreliable.
pub fn validate_text(text: &str) -> ValidationReport {
    let (stream, bad) = tokenize_lenient(text);
    if bad.is_empty() {
        return validate(&stream);
    }
    let errors = bad
        .into_iter()
        .map(|b| ValidationError {
            position: Position::at(b.line, b.index),
            category: ErrorCategory::InvalidToken,
            message: format!("{:?} at column {} is not a hex pair", b.lexeme, b.column),
        })
        .collect();
    ValidationReport { errors }
}
