//! Dataset construction and batch scoring.
//!
//! A YNote corpus directory becomes `train.jsonl` / `eval.jsonl`, each
//! record pairing a first/last-note prompt with the full HNote piece.
//! Directories of generated `.hnote` pieces are validated and scored
//! against references matched by file id.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HnoteError, Result};
use crate::fsutil::{create_dir_all, file_id, list_files, read_text, write_atomic};
use crate::metrics::{BleuMode, CorrectnessReport, MetricScores};
use crate::report::ScoreRow;
use crate::score::{assemble_notes, Score};
use crate::token::{pitch_name, TokenCode, UNITS_PER_MEASURE};
use crate::validate::{validate_text, ValidationReport};
use crate::ynote::{parse_ynote, ynote_to_hnote, ConvertOptions, DurationTable};

/// First and last onset of one line plus its length in measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinePrompt {
    pub first: TokenCode,
    pub last: TokenCode,
    pub measures: usize,
}

/// The per-line constraints handed to a generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PromptSpec {
    pub lines: Vec<LinePrompt>,
}

impl PromptSpec {
    /// `L<i>: first=<hex> last=<hex> measures=<k>`, one line each,
    /// joined with `\n` and no trailing newline.
    pub fn render(&self) -> String {
        let rendered: Vec<String> = self
            .lines
            .iter()
            .enumerate()
            .map(|(i, l)| {
                format!(
                    "L{i}: first={} last={} measures={}",
                    l.first, l.last, l.measures
                )
            })
            .collect();
        rendered.join("\n")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Vec::new();
        for (i, raw) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let err = |reason: &str| HnoteError::PromptFormat {
                line: i,
                reason: reason.to_string(),
            };
            let (label, rest) = raw.split_once(':').ok_or_else(|| err("missing ':'"))?;
            if label.trim() != format!("L{i}") {
                return Err(err("line label out of sequence"));
            }
            let mut first = None;
            let mut last = None;
            let mut measures = None;
            for field in rest.split_whitespace() {
                let (key, value) = field
                    .split_once('=')
                    .ok_or_else(|| err("expected key=value"))?;
                let onset = || {
                    value
                        .parse::<TokenCode>()
                        .ok()
                        .filter(|t| t.is_onset())
                        .ok_or_else(|| err("expected an onset code 00..7F"))
                };
                match key {
                    "first" => first = Some(onset()?),
                    "last" => last = Some(onset()?),
                    "measures" => {
                        measures = Some(
                            value
                                .parse::<usize>()
                                .ok()
                                .filter(|&m| m > 0)
                                .ok_or_else(|| err("measures must be a positive integer"))?,
                        )
                    }
                    _ => return Err(err("unknown key")),
                }
            }
            lines.push(LinePrompt {
                first: first.ok_or_else(|| err("missing first"))?,
                last: last.ok_or_else(|| err("missing last"))?,
                measures: measures.ok_or_else(|| err("missing measures"))?,
            });
        }
        Ok(PromptSpec { lines })
    }

    pub fn total_units(&self) -> usize {
        self.lines
            .iter()
            .map(|l| l.measures * UNITS_PER_MEASURE)
            .sum()
    }
}

/// Reads the first and last note of every line.
pub fn extract_prompts(score: &Score) -> PromptSpec {
    let notes = assemble_notes(score);
    let lines = score
        .lines()
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let mut in_line = notes.iter().filter(|n| n.start.line == i);
            let first = in_line.next().expect("a valid line has a note");
            let last = in_line.next_back().unwrap_or(first);
            LinePrompt {
                first: TokenCode::new(first.pitch),
                last: TokenCode::new(last.pitch),
                measures: line.measures().len(),
            }
        })
        .collect();
    PromptSpec { lines }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub prompt: String,
    pub completion: String,
}

impl DatasetRecord {
    pub fn from_score(id: impl Into<String>, score: &Score) -> Self {
        DatasetRecord {
            id: id.into(),
            prompt: extract_prompts(score).render(),
            completion: score.to_text(),
        }
    }
}

/// Serializes records one JSON object per line.
pub fn to_jsonl(records: &[DatasetRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn from_jsonl(text: &str) -> Result<Vec<DatasetRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(HnoteError::from))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub eval: f64,
}

impl SplitRatios {
    pub fn new(train: f64, eval: f64) -> Result<Self> {
        let ok = train >= 0.0 && eval >= 0.0 && ((train + eval) - 1.0).abs() < 1e-9;
        if !ok {
            return Err(HnoteError::BadConfig(format!(
                "split ratios {train},{eval} must be non-negative and sum to 1"
            )));
        }
        Ok(SplitRatios { train, eval })
    }

    fn train_count(&self, n: usize) -> usize {
        ((self.train * n as f64).round() as usize).min(n)
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.9,
            eval: 0.1,
        }
    }
}

impl FromStr for SplitRatios {
    type Err = HnoteError;

    /// `"0.9,0.1"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || HnoteError::BadConfig(format!("split {s:?} is not TRAIN,EVAL"));
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        SplitRatios::new(a, b)
    }
}

/// Counts over a set of pieces.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CorpusStats {
    pub pieces: usize,
    pub lines: usize,
    pub measures: usize,
    pub units: usize,
    pub notes: usize,
    pub rests: usize,
    /// Sounding notes per onset pitch.
    pub pitch_histogram: BTreeMap<u8, usize>,
}

impl CorpusStats {
    pub fn add(&mut self, score: &Score) {
        self.pieces += 1;
        self.lines += score.lines().len();
        self.measures += score.measure_count();
        self.units += score.unit_count();
        for note in assemble_notes(score) {
            if note.is_rest() {
                self.rests += 1;
            } else {
                self.notes += 1;
                *self.pitch_histogram.entry(note.pitch).or_insert(0) += 1;
            }
        }
    }

    pub fn from_scores<'a>(scores: impl IntoIterator<Item = &'a Score>) -> Self {
        let mut stats = CorpusStats::default();
        for s in scores {
            stats.add(s);
        }
        stats
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.totals() {
            writeln!(out, "{k:<9}{v}").unwrap();
        }
        out.push_str("pitch histogram:\n");
        for (&p, &n) in &self.pitch_histogram {
            let name = pitch_name(p as u32).expect("onset pitch");
            writeln!(out, "  {:02X} {name:<4} {n}", p).unwrap();
        }
        out
    }

    /// `section,key,value` rows.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("section,key,value\n");
        for (k, v) in self.totals() {
            writeln!(out, "total,{k},{v}").unwrap();
        }
        for (&p, &n) in &self.pitch_histogram {
            writeln!(out, "pitch,{p:02X},{n}").unwrap();
        }
        out
    }

    fn totals(&self) -> [(&'static str, usize); 6] {
        [
            ("pieces", self.pieces),
            ("lines", self.lines),
            ("measures", self.measures),
            ("units", self.units),
            ("notes", self.notes),
            ("rests", self.rests),
        ]
    }
}

/// A file that could not be used, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub file: String,
    pub reason: String,
}

impl fmt::Display for Reject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.file, self.reason)
    }
}

fn render_rejects(rejects: &[Reject]) -> String {
    rejects.iter().map(|r| format!("{r}\n")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<DatasetRecord>,
    pub eval: Vec<DatasetRecord>,
    pub stats: CorpusStats,
    pub rejects: Vec<Reject>,
}

impl Dataset {
    /// Writes `train.jsonl`, `eval.jsonl`, `stats.txt`, `stats.csv` and
    /// `rejects.txt` into `out_dir`.
    pub fn write_to(&self, out_dir: &Path) -> Result<()> {
        create_dir_all(out_dir)?;
        write_atomic(&out_dir.join("train.jsonl"), to_jsonl(&self.train)?)?;
        write_atomic(&out_dir.join("eval.jsonl"), to_jsonl(&self.eval)?)?;
        write_atomic(&out_dir.join("stats.txt"), self.stats.render_text())?;
        write_atomic(&out_dir.join("stats.csv"), self.stats.render_csv())?;
        write_atomic(&out_dir.join("rejects.txt"), render_rejects(&self.rejects))
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Loads every `.ynote` file in `dir` and converts it. Files that fail to
/// read, parse or convert become rejects.
/// A converted corpus piece and its id.
pub type Piece = (String, Score);

pub fn load_ynote_corpus(
    dir: &Path,
    table: &DurationTable,
    options: ConvertOptions,
) -> Result<(Vec<Piece>, Vec<Reject>)> {
    let files = list_files(dir, "ynote")?;
    let results: Vec<_> = files
        .par_iter()
        .map(|path| {
            let text = read_text(path)?;
            let doc = parse_ynote(&text, table)?;
            ynote_to_hnote(&doc, options)
        })
        .collect();
    let mut pieces = Vec::new();
    let mut rejects = Vec::new();
    for (path, result) in files.iter().zip(results) {
        match result {
            Ok(score) => pieces.push((file_id(path), score)),
            Err(e) => rejects.push(Reject {
                file: file_name(path),
                reason: e.to_string(),
            }),
        }
    }
    Ok((pieces, rejects))
}

/// Splits converted pieces into train/eval records. Whole pieces are
/// shuffled with a seeded generator over id order, so the result depends
/// only on the ids, the ratios and the seed.
pub fn split_records(
    pieces: &[Piece],
    ratios: SplitRatios,
    seed: u64,
) -> (Vec<DatasetRecord>, Vec<DatasetRecord>) {
    let mut records: Vec<DatasetRecord> = pieces
        .iter()
        .map(|(id, score)| DatasetRecord::from_score(id.clone(), score))
        .collect();
    records.sort_by(|a, b| a.id.cmp(&b.id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records.shuffle(&mut rng);
    let n_train = ratios.train_count(records.len());
    let mut eval = records.split_off(n_train);
    let mut train = records;
    train.sort_by(|a, b| a.id.cmp(&b.id));
    eval.sort_by(|a, b| a.id.cmp(&b.id));
    (train, eval)
}

pub fn build_dataset(
    corpus_dir: &Path,
    table: &DurationTable,
    ratios: SplitRatios,
    seed: u64,
) -> Result<Dataset> {
    let (pieces, rejects) = load_ynote_corpus(corpus_dir, table, ConvertOptions::default())?;
    if pieces.is_empty() && rejects.is_empty() {
        return Err(HnoteError::EmptyCorpus);
    }
    let stats = CorpusStats::from_scores(pieces.iter().map(|(_, s)| s));
    let (train, eval) = split_records(&pieces, ratios, seed);
    Ok(Dataset {
        train,
        eval,
        stats,
        rejects,
    })
}

/// Stats over every `.hnote` and `.ynote` file in `dir`.
pub fn directory_stats(dir: &Path, table: &DurationTable) -> Result<(CorpusStats, Vec<Reject>)> {
    let (ypieces, mut rejects) = load_ynote_corpus(dir, table, ConvertOptions::default())?;
    let mut stats = CorpusStats::from_scores(ypieces.iter().map(|(_, s)| s));
    for path in list_files(dir, "hnote")? {
        match read_text(&path).and_then(|t| Score::parse(&t)) {
            Ok(score) => stats.add(&score),
            Err(e) => rejects.push(Reject {
                file: file_name(&path),
                reason: e.to_string(),
            }),
        }
    }
    Ok((stats, rejects))
}

/// Reference id for a generated piece: the id itself, or the part before
/// `__` for multi-sample names like `song__3`.
pub fn reference_id(generated_id: &str) -> &str {
    generated_id
        .split_once("__")
        .map_or(generated_id, |(base, _)| base)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScoringIssue {
    MissingReference { id: String },
    InvalidReference { id: String, reason: String },
}

impl fmt::Display for ScoringIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoringIssue::MissingReference { id } => write!(f, "{id}: no reference piece"),
            ScoringIssue::InvalidReference { id, reason } => {
                write!(f, "{id}: reference does not validate: {reason}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoringOutcome {
    pub correctness: CorrectnessReport,
    /// Validation of every generated piece, by id.
    pub validations: Vec<(String, ValidationReport)>,
    /// Metrics for valid pieces with a usable reference, by id.
    pub rows: Vec<ScoreRow>,
    pub issues: Vec<ScoringIssue>,
}

/// Validates generated texts and scores the valid ones against their
/// references. Invalid pieces only count toward the correctness rate.
pub fn score_texts(
    generated: &[(String, String)],
    references: &BTreeMap<String, String>,
    mode: BleuMode,
) -> ScoringOutcome {
    let parsed_refs: BTreeMap<&str, std::result::Result<Vec<TokenCode>, String>> = references
        .par_iter()
        .map(|(id, text)| {
            (
                id.as_str(),
                Score::parse(text)
                    .map(|s| s.flat())
                    .map_err(|e| e.to_string()),
            )
        })
        .collect();

    let mut sorted: Vec<&(String, String)> = generated.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));

    let per_piece: Vec<_> = sorted
        .par_iter()
        .map(|(id, text)| {
            let report = validate_text(text);
            let ref_id = reference_id(id);
            let scored = match parsed_refs.get(ref_id) {
                None => Err(ScoringIssue::MissingReference { id: id.clone() }),
                Some(Err(reason)) => Err(ScoringIssue::InvalidReference {
                    id: id.clone(),
                    reason: reason.clone(),
                }),
                Some(Ok(reference)) if report.is_valid() => {
                    let candidate = Score::parse(text).expect("validated").flat();
                    Ok(Some(
                        MetricScores::compute(&candidate, reference, mode)
                            .expect("valid pieces are non-empty"),
                    ))
                }
                Some(Ok(_)) => Ok(None),
            };
            (id.clone(), report, scored)
        })
        .collect();

    let mut outcome = ScoringOutcome {
        correctness: CorrectnessReport::default(),
        validations: Vec::new(),
        rows: Vec::new(),
        issues: Vec::new(),
    };
    for (id, report, scored) in per_piece {
        outcome.correctness.add(&report);
        match scored {
            Ok(Some(scores)) => outcome.rows.push(ScoreRow {
                id: id.clone(),
                scores,
            }),
            Ok(None) => {}
            Err(issue) => outcome.issues.push(issue),
        }
        outcome.validations.push((id, report));
    }
    outcome
}

fn read_dir_texts(dir: &Path, ext: &str) -> Result<Vec<(String, String)>> {
    let files: Vec<PathBuf> = list_files(dir, ext)?;
    files
        .par_iter()
        .map(|p| Ok((file_id(p), read_text(p)?)))
        .collect()
}

/// Scores a directory of `<id>.hnote` generations against a directory of
/// `<id>.hnote` references.
pub fn score_generated(
    generated_dir: &Path,
    references_dir: &Path,
    mode: BleuMode,
) -> Result<ScoringOutcome> {
    let generated = read_dir_texts(generated_dir, "hnote")?;
    let references: BTreeMap<String, String> = read_dir_texts(references_dir, "hnote")?
        .into_iter()
        .collect();
    Ok(score_texts(&generated, &references, mode))
}
