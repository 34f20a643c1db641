use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use anyhow::{Context as _, Result};
use hnote_core::corpus::{directory_stats, from_jsonl, reference_id, ScoringIssue};
use hnote_core::report::{render_correctness, render_csv, render_text};
use hnote_core::{
    build_dataset, correctness_rate, export_midi, hnote_to_ynote, parse_ynote, score_texts,
    validate_text, BleuMode, ConvertOptions, DatasetRecord, DurationTable, ExportConfig,
    GenerateConfig, NgramModel, PromptSpec, Score, SplitRatios,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{
    BleuModeArg, ConvertArgs, DatasetCommand, ExportMidiArgs, Format, NgramCommand, Notation,
    ScoreArgs,
};

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some input failed validation; reports were still written.
    Invalid,
}

pub struct Ctx {
    pub seed: u64,
    pub table: DurationTable,
    pub quiet: bool,
    pub format: Format,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .context("reading stdin")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn sorted_files(dir: &Path, ext: &str) -> Result<Vec<std::path::PathBuf>> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == ext))
        .collect();
    files.sort();
    Ok(files)
}

pub fn validate(ctx: &Ctx, files: &[std::path::PathBuf]) -> Result<Status> {
    let mut reports = Vec::new();
    let mut out = String::new();
    if ctx.format == Format::Csv {
        out.push_str("file,valid,errors,categories\n");
    }
    for path in files {
        let report = validate_text(&read(path)?);
        let name = path.display();
        match ctx.format {
            Format::Text if report.is_valid() => writeln!(out, "{name}: valid")?,
            Format::Text => {
                writeln!(out, "{name}: invalid ({} errors)", report.errors().len())?;
                for e in report.errors() {
                    writeln!(out, "  {e}")?;
                }
            }
            Format::Csv => {
                let cats: Vec<&str> = report.categories().iter().map(|c| c.as_str()).collect();
                writeln!(
                    out,
                    "{name},{},{},{}",
                    report.is_valid(),
                    report.errors().len(),
                    cats.join(";")
                )?;
            }
        }
        reports.push(report);
    }
    let summary = correctness_rate(&reports);
    match ctx.format {
        Format::Text => {
            out.push('\n');
            out.push_str(&render_correctness(&summary));
        }
        Format::Csv => ctx.note(summary.to_string()),
    }
    emit(&out)?;
    Ok(if summary.valid == summary.total {
        Status::Ok
    } else {
        Status::Invalid
    })
}

pub fn convert(ctx: &Ctx, args: &ConvertArgs) -> Result<Status> {
    let text = read(&args.input)?;
    let converted = match (args.from, args.to) {
        (Notation::Ynote, Notation::Hnote) => {
            let doc = parse_ynote(&text, &ctx.table)?;
            let options = ConvertOptions {
                merge_ties: args.merge_ties,
            };
            hnote_core::ynote_to_hnote(&doc, options)?.to_text()
        }
        (Notation::Hnote, Notation::Ynote) => {
            if args.merge_ties {
                return Err(usage("--merge-ties only applies to ynote -> hnote"));
            }
            let report = validate_text(&text);
            if !report.is_valid() {
                for e in report.errors() {
                    eprintln!("{}: {e}", args.input.display());
                }
                return Ok(Status::Invalid);
            }
            hnote_to_ynote(&Score::parse(&text)?, &ctx.table)?.to_text()
        }
        _ => return Err(usage("--from and --to must differ")),
    };
    match &args.output {
        Some(path) => write(path, converted.as_bytes())?,
        None => emit(&converted)?,
    }
    Ok(Status::Ok)
}

pub fn dataset(ctx: &Ctx, cmd: &DatasetCommand) -> Result<Status> {
    let DatasetCommand::Build { corpus, out, split } = cmd;
    let ratios: SplitRatios = split.parse().map_err(|e| usage(format!("--split: {e}")))?;
    let ds = build_dataset(corpus, &ctx.table, ratios, ctx.seed)?;
    ds.write_to(out)?;
    for r in &ds.rejects {
        ctx.note(format!("rejected {}: {}", r.file, r.reason));
    }
    ctx.note(format!(
        "{} train, {} eval, {} rejected -> {}",
        ds.train.len(),
        ds.eval.len(),
        ds.rejects.len(),
        out.display()
    ));
    Ok(if ds.rejects.is_empty() {
        Status::Ok
    } else {
        Status::Invalid
    })
}

/// Completions of a JSONL dataset or the `.hnote` files of a directory,
/// keyed by id.
fn load_texts(path: &Path) -> Result<BTreeMap<String, String>> {
    if path.is_dir() {
        sorted_files(path, "hnote")?
            .into_iter()
            .map(|p| Ok((file_stem(&p), read(&p)?)))
            .collect()
    } else {
        let records =
            from_jsonl(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        Ok(records.into_iter().map(|r| (r.id, r.completion)).collect())
    }
}

pub fn ngram(ctx: &Ctx, cmd: &NgramCommand) -> Result<Status> {
    match cmd {
        NgramCommand::Train {
            corpus,
            out,
            order,
            alpha,
        } => {
            let texts = load_texts(corpus)?;
            let scores: Vec<Score> = texts
                .iter()
                .map(|(id, text)| {
                    Score::parse(text).with_context(|| format!("training piece {id}"))
                })
                .collect::<Result<_>>()?;
            let model = NgramModel::train(&scores, *order, *alpha)?;
            write(out, model.to_text().as_bytes())?;
            ctx.note(format!(
                "trained order-{order} model on {} pieces, {} contexts, vocabulary {}",
                scores.len(),
                model.contexts().count(),
                model.vocab().len()
            ));
            Ok(Status::Ok)
        }
        NgramCommand::Generate {
            model,
            prompts,
            out,
            samples,
            max_retries,
            truncate_probability,
        } => {
            if !(0.0..=1.0).contains(truncate_probability) {
                return Err(usage("--truncate-probability must lie in [0, 1]"));
            }
            let model = NgramModel::parse(&read(model)?)?;
            let mut records: Vec<DatasetRecord> = from_jsonl(&read(prompts)?)
                .with_context(|| format!("parsing {}", prompts.display()))?;
            records.sort_by(|a, b| a.id.cmp(&b.id));
            fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

            let mut seeds = ChaCha8Rng::seed_from_u64(ctx.seed);
            let mut csv = String::from(
                "id,line,first_satisfied,last_satisfied_before_patch,last_satisfied,retries,patched\n",
            );
            let (mut lines, mut first, mut before, mut after, mut cut) = (0, 0, 0, 0, 0);
            for rec in &records {
                let prompt = PromptSpec::parse(&rec.prompt)
                    .with_context(|| format!("prompt of record {}", rec.id))?;
                for k in 0..*samples {
                    let config = GenerateConfig {
                        seed: seeds.gen(),
                        max_retries: *max_retries,
                        truncate_probability: *truncate_probability,
                    };
                    let piece = model.generate(&prompt, &config);
                    let id = format!("{}__{k}", rec.id);
                    write(&out.join(format!("{id}.hnote")), piece.to_text().as_bytes())?;
                    for (i, l) in piece.lines.iter().enumerate() {
                        lines += 1;
                        first += l.first_satisfied as usize;
                        before += l.last_satisfied_before_patch as usize;
                        after += l.last_satisfied as usize;
                        writeln!(
                            csv,
                            "{id},{i},{},{},{},{},{}",
                            l.first_satisfied,
                            l.last_satisfied_before_patch,
                            l.last_satisfied,
                            l.retries,
                            l.patched
                        )?;
                    }
                    cut += piece.truncated_at.is_some() as usize;
                }
            }
            let pct = |n: usize| {
                if lines == 0 {
                    0.0
                } else {
                    100.0 * n as f64 / lines as f64
                }
            };
            match ctx.format {
                Format::Csv => emit(&csv)?,
                Format::Text => {
                    let pieces = records.len() * *samples as usize;
                    let mut text = format!("generated {pieces} pieces ({lines} lines)\n");
                    writeln!(
                        text,
                        "first note held:          {first}/{lines} ({:.1}%)",
                        pct(first)
                    )?;
                    writeln!(
                        text,
                        "last note before patching: {before}/{lines} ({:.1}%)",
                        pct(before)
                    )?;
                    writeln!(
                        text,
                        "last note after patching:  {after}/{lines} ({:.1}%)",
                        pct(after)
                    )?;
                    if cut > 0 {
                        writeln!(text, "synthetically truncated:  {cut}")?;
                    }
                    emit(&text)?;
                }
            }
            Ok(Status::Ok)
        }
    }
}

pub fn score(ctx: &Ctx, args: &ScoreArgs) -> Result<Status> {
    let generated: Vec<(String, String)> = sorted_files(&args.generated, "hnote")?
        .into_iter()
        .map(|p| Ok((file_stem(&p), read(&p)?)))
        .collect::<Result<_>>()?;
    let references = load_texts(&args.references)?;
    let mode = match args.bleu_mode {
        BleuModeArg::Individual => BleuMode::Individual,
        BleuModeArg::Cumulative => BleuMode::Cumulative,
    };
    let outcome = score_texts(&generated, &references, mode);
    for issue in &outcome.issues {
        match issue {
            ScoringIssue::MissingReference { id } => {
                ctx.note(format!("{id}: no reference {:?}", reference_id(id)))
            }
            ScoringIssue::InvalidReference { id, reason } => {
                ctx.note(format!("{id}: reference invalid: {reason}"))
            }
        }
    }
    match ctx.format {
        Format::Csv => {
            ctx.note(outcome.correctness.to_string());
            emit(&render_csv(&outcome.rows))?;
        }
        Format::Text => {
            let mut text = render_correctness(&outcome.correctness);
            text.push('\n');
            if outcome.rows.is_empty() {
                text.push_str("no pieces scored\n");
            } else {
                text.push_str(&render_text(&outcome.rows));
            }
            emit(&text)?;
        }
    }
    Ok(Status::Ok)
}

pub fn export(ctx: &Ctx, args: &ExportMidiArgs) -> Result<Status> {
    let text = read(&args.input)?;
    let report = validate_text(&text);
    if !report.is_valid() {
        for e in report.errors() {
            eprintln!("{}: {e}", args.input.display());
        }
        return Ok(Status::Invalid);
    }
    let score = Score::parse(&text)?;
    let config = ExportConfig {
        ppq: args.ppq,
        tempo_us_per_beat: ExportConfig::tempo_from_bpm(args.tempo_bpm)?,
        velocity: args.velocity,
        ..Default::default()
    };
    let bytes = export_midi(&score, &config)?;
    write(&args.output, &bytes)?;
    ctx.note(format!(
        "wrote {} ({} bytes, {} ticks)",
        args.output.display(),
        bytes.len(),
        hnote_core::midi::total_ticks(&score, &config)
    ));
    Ok(Status::Ok)
}

pub fn stats(ctx: &Ctx, dir: &Path) -> Result<Status> {
    let (stats, rejects) = directory_stats(dir, &ctx.table)?;
    for r in &rejects {
        ctx.note(format!("rejected {}: {}", r.file, r.reason));
    }
    match ctx.format {
        Format::Text => emit(&stats.render_text())?,
        Format::Csv => emit(&stats.render_csv())?,
    }
    Ok(if rejects.is_empty() {
        Status::Ok
    } else {
        Status::Invalid
    })
}

/// Bad flag combinations that clap cannot express.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Reads a `--duration-table` file, or the default table.
pub fn load_table(path: Option<&Path>) -> Result<DurationTable> {
    match path {
        None => Ok(DurationTable::default()),
        Some(p) => Ok(DurationTable::parse(&read(p)?)?),
    }
}
