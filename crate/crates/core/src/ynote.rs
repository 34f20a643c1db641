//! YNote parsing and YNote ⇄ HNote conversion.
//!
//! A YNote token is four characters `PPDD`: `PP` is the same two-digit
//! hex pitch index HNote uses for onsets (`00` = rest) and `DD` is a
//! duration code resolved through a [`DurationTable`]. Each token maps to
//! one onset followed by `units - 1` continuations.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{HnoteError, Result};
use crate::score::{assemble_notes, emit_tokens, Note, NoteStart, Score};
use crate::token::{TokenCode, REST, UNITS_PER_MEASURE};

/// Two-character YNote duration code.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DurationCode([u8; 2]);

impl DurationCode {
    pub fn new(code: &str) -> Option<Self> {
        match code.as_bytes() {
            &[a, b] if a.is_ascii_alphanumeric() && b.is_ascii_alphanumeric() => {
                Some(DurationCode([a, b]))
            }
            _ => None,
        }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("ascii")
    }
}

impl fmt::Display for DurationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for DurationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

/// Injective map from duration code to unit count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DurationTable {
    by_code: BTreeMap<DurationCode, u32>,
    by_units: BTreeMap<u32, DurationCode>,
}

const ANCHOR_CODE: &str = "02";
const ANCHOR_UNITS: u32 = 16;

impl Default for DurationTable {
    /// `01`–`04` are beat counts (8 units per beat); `05`–`09` cover
    /// sub-beat and dotted values.
    fn default() -> Self {
        Self::from_entries([
            ("01", 8),
            ("02", 16),
            ("03", 24),
            ("04", 32),
            ("05", 4),
            ("06", 2),
            ("07", 1),
            ("08", 12),
            ("09", 6),
        ])
        .expect("default table is well formed")
    }
}

impl DurationTable {
    pub fn from_entries<'a>(entries: impl IntoIterator<Item = (&'a str, u32)>) -> Result<Self> {
        let mut by_code = BTreeMap::new();
        let mut by_units = BTreeMap::new();
        for (code, units) in entries {
            let dc = DurationCode::new(code).ok_or_else(|| {
                HnoteError::DurationTable(format!(
                    "code {code:?} is not two alphanumeric characters"
                ))
            })?;
            if !(1..=UNITS_PER_MEASURE as u32).contains(&units) {
                return Err(HnoteError::DurationTable(format!(
                    "code {code}: {units} units is outside 1..=32"
                )));
            }
            if by_code.insert(dc, units).is_some() {
                return Err(HnoteError::DurationTable(format!("duplicate code {code}")));
            }
            if let Some(prev) = by_units.insert(units, dc) {
                return Err(HnoteError::DurationTable(format!(
                    "codes {prev} and {code} both map to {units} units"
                )));
            }
        }
        let anchor = DurationCode::new(ANCHOR_CODE).expect("valid");
        if by_code.get(&anchor) != Some(&ANCHOR_UNITS) {
            return Err(HnoteError::DurationTable(format!(
                "table must map {ANCHOR_CODE} to {ANCHOR_UNITS} units"
            )));
        }
        Ok(DurationTable { by_code, by_units })
    }

    /// Reads `CODE=UNITS` lines. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (code, units) = line.split_once('=').ok_or_else(|| {
                HnoteError::DurationTable(format!("line {}: expected CODE=UNITS", i + 1))
            })?;
            let units: u32 = units.trim().parse().map_err(|_| {
                HnoteError::DurationTable(format!(
                    "line {}: bad unit count {:?}",
                    i + 1,
                    units.trim()
                ))
            })?;
            entries.push((code.trim(), units));
        }
        Self::from_entries(entries)
    }

    pub fn to_text(&self) -> String {
        self.by_code
            .iter()
            .map(|(c, u)| format!("{c}={u}\n"))
            .collect()
    }

    pub fn units(&self, code: DurationCode) -> Option<u32> {
        self.by_code.get(&code).copied()
    }

    pub fn code_for(&self, units: u32) -> Option<DurationCode> {
        self.by_units.get(&units).copied()
    }

    /// Splits `units` into table values, longest first.
    pub fn decompose(&self, units: u32) -> Result<Vec<DurationCode>> {
        let mut remaining = units;
        let mut out = Vec::new();
        while remaining > 0 {
            let (&u, &code) = self
                .by_units
                .range(..=remaining)
                .next_back()
                .ok_or(HnoteError::UnrepresentableDuration { units })?;
            out.push(code);
            remaining -= u;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct YNoteToken {
    pub pitch: u8,
    pub code: DurationCode,
    pub units: u32,
}

impl fmt::Display for YNoteToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02X}{}", self.pitch, self.code)
    }
}

/// Parsed YNote text: one token list per musical line.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct YNoteDocument {
    pub lines: Vec<Vec<YNoteToken>>,
}

impl YNoteDocument {
    /// Tokens space-separated, one line per text line, final newline.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            let words: Vec<String> = line.iter().map(|t| t.to_string()).collect();
            out.push_str(&words.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn unit_count(&self) -> u64 {
        self.lines.iter().flatten().map(|t| t.units as u64).sum()
    }
}

fn parse_token(chunk: &str, line: usize, table: &DurationTable) -> Result<YNoteToken> {
    let malformed = |reason| HnoteError::MalformedToken {
        line,
        token: chunk.to_string(),
        reason,
    };
    let (pitch_field, code_field) = chunk.split_at(2);
    let pitch = pitch_field
        .parse::<TokenCode>()
        .map_err(|_| malformed("pitch field is not two hex digits"))?;
    if !pitch.is_onset() {
        return Err(malformed("pitch index above 7F"));
    }
    let code = DurationCode::new(code_field)
        .ok_or_else(|| malformed("duration code is not two alphanumeric characters"))?;
    let units = table
        .units(code)
        .ok_or_else(|| HnoteError::UnknownDurationCode {
            line,
            code: code_field.to_string(),
        })?;
    Ok(YNoteToken {
        pitch: pitch.value(),
        code,
        units,
    })
}

/// Parses YNote text. Whitespace-separated words may hold several
/// back-to-back 4-character tokens. Blank lines are skipped.
pub fn parse_ynote(text: &str, table: &DurationTable) -> Result<YNoteDocument> {
    let mut lines = Vec::new();
    for raw in text.lines() {
        if raw.trim().is_empty() {
            continue;
        }
        let line_idx = lines.len();
        let mut tokens = Vec::new();
        for word in raw.split_whitespace() {
            if !word.is_ascii() || word.len() % 4 != 0 {
                return Err(HnoteError::MalformedToken {
                    line: line_idx,
                    token: word.to_string(),
                    reason: "tokens are exactly four ASCII characters",
                });
            }
            for i in (0..word.len()).step_by(4) {
                tokens.push(parse_token(&word[i..i + 4], line_idx, table)?);
            }
        }
        lines.push(tokens);
    }
    Ok(YNoteDocument { lines })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConvertOptions {
    /// Merge a sounding token into the previous one when both have the
    /// same pitch and the token starts on a barline, producing a
    /// continuation across the bar. One-way: the original token split is
    /// not recoverable.
    pub merge_ties: bool,
}

/// YNote → HNote. Fails with `DurationOverflow` when a line does not fill
/// whole measures.
pub fn ynote_to_hnote(doc: &YNoteDocument, options: ConvertOptions) -> Result<Score> {
    let mut notes: Vec<Note> = Vec::new();
    for (line_idx, line) in doc.lines.iter().enumerate() {
        let line_units: usize = line.iter().map(|t| t.units as usize).sum();
        if line_units == 0 || !line_units.is_multiple_of(UNITS_PER_MEASURE) {
            return Err(HnoteError::DurationOverflow {
                line: line_idx,
                units: line_units,
            });
        }
        let first_of_line = notes.len();
        let mut offset = 0usize;
        for tok in line {
            let tie = options.merge_ties
                && tok.pitch != REST
                && offset.is_multiple_of(UNITS_PER_MEASURE)
                && notes.len() > first_of_line
                && notes.last().map(|n| n.pitch) == Some(tok.pitch);
            if tie {
                notes.last_mut().expect("checked").duration_units += tok.units;
            } else {
                notes.push(Note {
                    pitch: tok.pitch,
                    duration_units: tok.units,
                    start: NoteStart {
                        line: line_idx,
                        measure: offset / UNITS_PER_MEASURE,
                        unit: offset % UNITS_PER_MEASURE,
                    },
                });
            }
            offset += tok.units as usize;
        }
    }
    emit_tokens(&notes)
}

/// HNote → YNote. Notes whose length is not a table value are split
/// greedily into several same-pitch tokens.
pub fn hnote_to_ynote(score: &Score, table: &DurationTable) -> Result<YNoteDocument> {
    let mut lines: Vec<Vec<YNoteToken>> = vec![Vec::new(); score.lines().len()];
    for note in assemble_notes(score) {
        let codes = match table.code_for(note.duration_units) {
            Some(code) => vec![code],
            None => table.decompose(note.duration_units)?,
        };
        for code in codes {
            lines[note.start.line].push(YNoteToken {
                pitch: note.pitch,
                code,
                units: table.units(code).expect("code comes from table"),
            });
        }
    }
    Ok(YNoteDocument { lines })
}
