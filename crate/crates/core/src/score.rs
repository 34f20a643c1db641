//! Validated pieces and their note-level view.

use std::fmt;

use crate::error::{HnoteError, Result};
use crate::token::{TokenCode, REST, UNITS_PER_MEASURE};
use crate::tokenize::{tokenize, TokenLine, TokenStream};
use crate::validate::validate;

/// Exactly one bar of 32 units.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Measure {
    units: [TokenCode; UNITS_PER_MEASURE],
}

impl Measure {
    pub fn units(&self) -> &[TokenCode; UNITS_PER_MEASURE] {
        &self.units
    }
}

impl fmt::Debug for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.units.iter()).finish()
    }
}

/// One musical line: a non-empty run of measures starting on an onset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Line {
    measures: Vec<Measure>,
}

impl Line {
    pub fn measures(&self) -> &[Measure] {
        &self.measures
    }

    pub fn unit_count(&self) -> usize {
        self.measures.len() * UNITS_PER_MEASURE
    }

    pub fn units(&self) -> impl Iterator<Item = TokenCode> + '_ {
        self.measures.iter().flat_map(|m| m.units.iter().copied())
    }
}

/// A piece that satisfies the HNote grammar. The only ways to build one
/// go through validation, so holding a `Score` is proof of validity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Score {
    lines: Vec<Line>,
}

impl Score {
    /// Validates `stream` and takes its structure.
    pub fn from_stream(stream: &TokenStream) -> Result<Self> {
        let report = validate(stream);
        if !report.is_valid() {
            return Err(HnoteError::InvalidScore(Box::new(report)));
        }
        let lines = stream
            .lines()
            .iter()
            .map(|l| Line {
                measures: l
                    .codes
                    .chunks_exact(UNITS_PER_MEASURE)
                    .map(|c| Measure {
                        units: c.try_into().expect("chunks_exact yields full measures"),
                    })
                    .collect(),
            })
            .collect();
        Ok(Score { lines })
    }

    /// Tokenizes and validates HNote text.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_stream(&tokenize(text)?)
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn measure_count(&self) -> usize {
        self.lines.iter().map(|l| l.measures.len()).sum()
    }

    pub fn unit_count(&self) -> usize {
        self.measure_count() * UNITS_PER_MEASURE
    }

    pub fn to_stream(&self) -> TokenStream {
        TokenStream::new(
            self.lines
                .iter()
                .map(|l| TokenLine {
                    codes: l.units().collect(),
                })
                .collect(),
        )
    }

    /// All units, line structure dropped.
    pub fn flat(&self) -> Vec<TokenCode> {
        self.lines.iter().flat_map(|l| l.units()).collect()
    }

    /// Canonical, bit-exact text form.
    pub fn to_text(&self) -> String {
        self.to_stream().to_text()
    }
}

/// Where a note's onset sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NoteStart {
    pub line: usize,
    pub measure: usize,
    /// Offset inside the measure, `0..32`.
    pub unit: usize,
}

impl NoteStart {
    /// Unit offset from the start of the line.
    pub fn line_offset(&self) -> usize {
        self.measure * UNITS_PER_MEASURE + self.unit
    }
}

/// An onset and its continuations. Pitch 0 is a rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Note {
    pub pitch: u8,
    pub duration_units: u32,
    pub start: NoteStart,
}

impl Note {
    pub fn is_rest(&self) -> bool {
        self.pitch == REST
    }
}

/// Splits a score into its maximal onset + continuation runs.
pub fn assemble_notes(score: &Score) -> Vec<Note> {
    let mut notes: Vec<Note> = Vec::new();
    for (line_idx, line) in score.lines.iter().enumerate() {
        for (i, code) in line.units().enumerate() {
            if code.is_onset() {
                notes.push(Note {
                    pitch: code.pitch(),
                    duration_units: 1,
                    start: NoteStart {
                        line: line_idx,
                        measure: i / UNITS_PER_MEASURE,
                        unit: i % UNITS_PER_MEASURE,
                    },
                });
            } else {
                // Validity guarantees an open note of the same pitch.
                notes
                    .last_mut()
                    .expect("line starts on an onset")
                    .duration_units += 1;
            }
        }
    }
    notes
}

/// Rebuilds a score from notes. Notes are grouped into lines by
/// `start.line`, which must be non-decreasing; the measure/unit fields of
/// `start` are recomputed, not read.
pub fn emit_tokens(notes: &[Note]) -> Result<Score> {
    let mut lines: Vec<Vec<TokenCode>> = Vec::new();
    let mut current_line = None;
    for note in notes {
        if note.duration_units == 0 {
            return Err(HnoteError::InvalidNote(format!(
                "zero-length note at line {}",
                note.start.line
            )));
        }
        let onset = TokenCode::onset(note.pitch)?;
        match current_line {
            Some(l) if l == note.start.line => {}
            Some(l) if l > note.start.line => {
                return Err(HnoteError::InvalidNote(format!(
                    "line index goes backwards ({} after {l})",
                    note.start.line
                )))
            }
            _ => {
                current_line = Some(note.start.line);
                lines.push(Vec::new());
            }
        }
        let codes = lines.last_mut().expect("pushed above");
        codes.push(onset);
        codes.extend(std::iter::repeat_n(
            onset.sustained(),
            note.duration_units as usize - 1,
        ));
    }
    for (i, codes) in lines.iter().enumerate() {
        if codes.len() % UNITS_PER_MEASURE != 0 {
            return Err(HnoteError::DurationOverflow {
                line: i,
                units: codes.len(),
            });
        }
    }
    if lines.is_empty() {
        return Err(HnoteError::DurationOverflow { line: 0, units: 0 });
    }
    Score::from_stream(&TokenStream::from_codes(lines))
}
