//! `hnote`: validate, convert, build datasets, train and sample the n-gram
//! baseline, score generations and export MIDI.
//!
//! Exit status is 0 on success, 1 when an input fails validation and 2 on
//! usage or I/O errors.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use hnote_core::HnoteError;

use crate::args::{Cli, Command};
use crate::commands::{Ctx, Status, UsageError};

fn run(cli: &Cli) -> anyhow::Result<Status> {
    let ctx = Ctx {
        seed: cli.seed,
        table: commands::load_table(cli.duration_table.as_deref())?,
        quiet: cli.quiet,
        format: cli.format,
    };
    match &cli.command {
        Command::Validate { files } => commands::validate(&ctx, files),
        Command::Convert(args) => commands::convert(&ctx, args),
        Command::Dataset(cmd) => commands::dataset(&ctx, cmd),
        Command::Ngram(cmd) => commands::ngram(&ctx, cmd),
        Command::Score(args) => commands::score(&ctx, args),
        Command::ExportMidi(args) => commands::export(&ctx, args),
        Command::Stats { dir } => commands::stats(&ctx, dir),
    }
}

/// Errors caused by the content of an input file count as validation
/// failures; everything else is a usage or environment problem.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        return 2;
    }
    let content = err
        .chain()
        .filter_map(|e| e.downcast_ref::<HnoteError>())
        .any(|e| {
            matches!(
                e,
                HnoteError::InvalidToken { .. }
                    | HnoteError::InvalidScore(_)
                    | HnoteError::DurationOverflow { .. }
                    | HnoteError::InvalidNote(_)
                    | HnoteError::PitchOutOfRange(_)
                    | HnoteError::MalformedToken { .. }
                    | HnoteError::UnknownDurationCode { .. }
                    | HnoteError::UnrepresentableDuration { .. }
                    | HnoteError::EmptySequence
            )
        });
    if content {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Invalid) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
