//! HNote: a hexadecimal, measure-aligned encoding of monophonic melodies.
//!
//! One token is one 1/32-measure unit. `00`–`7F` start a note (or a rest,
//! `00`), `80`–`FF` sustain the note started by `code - 0x80`. Every
//! measure holds exactly 32 units.
//!
//! The crate covers the codec and validator, the YNote bridge, similarity
//! metrics, dataset construction, an n-gram baseline generator and MIDI
//! export.

pub mod corpus;
pub mod error;
mod fsutil;
pub mod metrics;
pub mod midi;
pub mod ngram;
pub mod report;
pub mod score;
pub mod token;
pub mod tokenize;
pub mod validate;
pub mod ynote;

pub use corpus::{
    build_dataset, extract_prompts, score_generated, score_texts, CorpusStats, Dataset,
    DatasetRecord, LinePrompt, PromptSpec, SplitRatios,
};
pub use error::{HnoteError, Result};
pub use metrics::{
    bleu, correctness_rate, lcs_len, rouge_l, rouge_n, BleuMode, BleuScores, CorrectnessReport,
    MetricScores, RougeL,
};
pub use midi::{export_midi, ExportConfig};
pub use ngram::{GenerateConfig, GeneratedPiece, LineReport, NgramModel};
pub use score::{assemble_notes, emit_tokens, Line, Measure, Note, NoteStart, Score};
pub use token::{
    pitch_name, NoteValue, ParseTokenError, TokenCode, REST, UNITS_PER_BEAT, UNITS_PER_MEASURE,
};
pub use tokenize::{tokenize, tokenize_lenient, TokenLine, TokenStream};
pub use validate::{
    validate, validate_text, ErrorCategory, Position, ValidationError, ValidationReport,
};
pub use ynote::{
    hnote_to_ynote, parse_ynote, ynote_to_hnote, ConvertOptions, DurationCode, DurationTable,
    YNoteDocument, YNoteToken,
};
