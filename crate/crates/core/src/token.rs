//! The HNote unit vocabulary.
//!
//! Every unit of an HNote stream is one byte. Values `0x00..=0x7F` are
//! onsets whose value is the pitch index on the semitone ladder anchored
//! at C-1 = 0 (the same numbering as MIDI note numbers). Values
//! `0x80..=0xFF` are continuations: `0x80 + p` sustains onset `p` by one
//! more unit. Onset `0x00` is a rest.

use std::fmt;
use std::str::FromStr;

use crate::error::{HnoteError, Result};

/// Units in one measure (4/4, quarter note = 8 units).
pub const UNITS_PER_MEASURE: usize = 32;
/// Units in one quarter-note beat.
pub const UNITS_PER_BEAT: usize = 8;
/// Onset code used for silence.
pub const REST: u8 = 0x00;

const CONTINUATION_BIT: u8 = 0x80;

/// One HNote unit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenCode(u8);

impl TokenCode {
    pub const fn new(value: u8) -> Self {
        TokenCode(value)
    }

    /// Onset token for `pitch`; fails when `pitch > 0x7F`.
    pub fn onset(pitch: u8) -> Result<Self> {
        if pitch & CONTINUATION_BIT != 0 {
            return Err(HnoteError::PitchOutOfRange(pitch as u32));
        }
        Ok(TokenCode(pitch))
    }

    /// Continuation token for `pitch`; fails when `pitch > 0x7F`.
    pub fn continuation(pitch: u8) -> Result<Self> {
        Self::onset(pitch).map(|t| t.sustained())
    }

    pub const fn value(self) -> u8 {
        self.0
    }

    pub const fn is_onset(self) -> bool {
        self.0 & CONTINUATION_BIT == 0
    }

    pub const fn is_continuation(self) -> bool {
        !self.is_onset()
    }

    pub const fn is_rest(self) -> bool {
        self.0 == REST
    }

    /// Pitch index carried by this token, whether onset or continuation.
    pub const fn pitch(self) -> u8 {
        self.0 & !CONTINUATION_BIT
    }

    /// The continuation code that sustains this token's pitch.
    pub const fn sustained(self) -> Self {
        TokenCode(self.0 | CONTINUATION_BIT)
    }

    /// The onset this token belongs to (identity for onsets).
    pub const fn onset_code(self) -> Self {
        TokenCode(self.pitch())
    }

    /// True when `self` may immediately follow `prev` in a stream.
    ///
    /// Onsets may follow anything; a continuation must follow its own
    /// onset or another copy of itself.
    pub fn may_follow(self, prev: TokenCode) -> bool {
        self.is_onset() || prev.sustained() == self
    }
}

impl fmt::Display for TokenCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02X}", self.0)
    }
}

impl fmt::Debug for TokenCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TokenCode({:02X})", self.0)
    }
}

impl From<u8> for TokenCode {
    fn from(value: u8) -> Self {
        TokenCode(value)
    }
}

impl From<TokenCode> for u8 {
    fn from(code: TokenCode) -> Self {
        code.0
    }
}

/// A lexeme that is not two hexadecimal digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTokenError(pub String);

impl fmt::Display for ParseTokenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} is not a two-digit hex token", self.0)
    }
}

impl std::error::Error for ParseTokenError {}

impl FromStr for TokenCode {
    type Err = ParseTokenError;

    /// Exactly two hexadecimal digits, either case.
    fn from_str(s: &str) -> std::result::Result<Self, ParseTokenError> {
        let bad = || ParseTokenError(s.to_string());
        let bytes = s.as_bytes();
        if bytes.len() != 2 || !bytes.iter().all(u8::is_ascii_hexdigit) {
            return Err(bad());
        }
        u8::from_str_radix(s, 16).map(TokenCode).map_err(|_| bad())
    }
}

const NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

/// Scientific pitch name of an onset index, e.g. `0x3C` is `"C4"`.
///
/// `0x00` renders as `"C-1"`; semantically it is always a rest.
pub fn pitch_name(code: u32) -> Result<String> {
    if code > 0x7F {
        return Err(HnoteError::PitchOutOfRange(code));
    }
    let octave = (code / 12) as i32 - 1;
    Ok(format!("{}{}", NAMES[(code % 12) as usize], octave))
}

/// Note values expressible in the 32-unit measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoteValue {
    Whole,
    DottedHalf,
    Half,
    Quarter,
    Eighth,
    Sixteenth,
    ThirtySecond,
}

impl NoteValue {
    pub const ALL: [NoteValue; 7] = [
        NoteValue::Whole,
        NoteValue::DottedHalf,
        NoteValue::Half,
        NoteValue::Quarter,
        NoteValue::Eighth,
        NoteValue::Sixteenth,
        NoteValue::ThirtySecond,
    ];

    /// Length in units: one onset plus its continuations.
    pub const fn units(self) -> u32 {
        match self {
            NoteValue::Whole => 32,
            NoteValue::DottedHalf => 24,
            NoteValue::Half => 16,
            NoteValue::Quarter => 8,
            NoteValue::Eighth => 4,
            NoteValue::Sixteenth => 2,
            NoteValue::ThirtySecond => 1,
        }
    }
}
