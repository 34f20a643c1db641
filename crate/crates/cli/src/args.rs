use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hnote", version, about = "HNote notation toolkit")]
pub struct Cli {
    /// Seed for every random choice (dataset split, generation).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// YNote duration table (`CODE=UNITS` per line) replacing the default.
    #[arg(long, global = true, value_name = "PATH")]
    pub duration_table: Option<PathBuf>,

    /// Suppress progress and summary messages on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Notation {
    Ynote,
    Hnote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BleuModeArg {
    Individual,
    Cumulative,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check HNote files and report the correctness rate.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Convert between YNote and HNote.
    Convert(ConvertArgs),
    /// Build training datasets.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Train or sample the n-gram baseline.
    #[command(subcommand)]
    Ngram(NgramCommand),
    /// Validate generated pieces and score them against references.
    Score(ScoreArgs),
    /// Render an HNote file as a Standard MIDI File.
    ExportMidi(ExportMidiArgs),
    /// Corpus statistics for a directory of .ynote/.hnote files.
    Stats { dir: PathBuf },
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, value_enum)]
    pub from: Notation,
    #[arg(long, value_enum)]
    pub to: Notation,
    /// Merge same-pitch notes starting on a barline into ties (YNote to
    /// HNote only; the result no longer converts back token for token).
    #[arg(long)]
    pub merge_ties: bool,
    /// Input file, `-` for stdin.
    pub input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    /// Convert a YNote corpus into train/eval JSONL files plus statistics.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Train and eval fractions.
        #[arg(long, default_value = "0.9,0.1")]
        split: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum NgramCommand {
    /// Count n-grams over a JSONL dataset or a directory of .hnote files.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = hnote_core::ngram::DEFAULT_ORDER)]
        order: usize,
        #[arg(long, default_value_t = hnote_core::ngram::DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Generate one piece per prompt and sample into `<out>/<id>__<k>.hnote`.
    Generate {
        #[arg(long)]
        model: PathBuf,
        /// JSONL records whose `prompt` fields are used.
        #[arg(long)]
        prompts: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        samples: u32,
        #[arg(long, default_value_t = hnote_core::ngram::DEFAULT_MAX_RETRIES)]
        max_retries: u32,
        /// Chance of cutting a piece short (synthetic incomplete output).
        #[arg(long, default_value_t = 0.0)]
        truncate_probability: f64,
    },
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub generated: PathBuf,
    /// Directory of `<id>.hnote` references or a JSONL dataset.
    #[arg(long)]
    pub references: PathBuf,
    #[arg(long, value_enum, default_value_t = BleuModeArg::Individual)]
    pub bleu_mode: BleuModeArg,
}

#[derive(Debug, Args)]
pub struct ExportMidiArgs {
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 480)]
    pub ppq: u16,
    #[arg(long, default_value_t = 60.0)]
    pub tempo_bpm: f64,
    #[arg(long, default_value_t = 90)]
    pub velocity: u8,
}
