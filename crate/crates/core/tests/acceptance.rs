//! Acceptance criteria AC1–AC9. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use hnote_core::corpus::from_jsonl;
use hnote_core::report::{render_correctness, render_text};
use hnote_core::{
    bleu, build_dataset, correctness_rate, export_midi, extract_prompts, hnote_to_ynote, lcs_len,
    parse_ynote, pitch_name, rouge_l, rouge_n, score_texts, tokenize, validate, validate_text,
    ynote_to_hnote, BleuMode, DurationTable, ErrorCategory, ExportConfig, GenerateConfig,
    MetricScores, NgramModel, NoteValue, Position, Score, SplitRatios, TokenCode, TokenStream,
    ValidationError, ValidationReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ac1_encoding_anchors() -> Check {
    let c4: TokenCode = "3C".parse().map_err(|e| format!("{e}"))?;
    let a0: TokenCode = "15".parse().map_err(|e| format!("{e}"))?;
    ensure(c4.pitch() == 60 && c4.is_onset(), || {
        format!("3C -> {}", c4.pitch())
    })?;
    ensure(a0.pitch() == 21, || format!("15 -> {}", a0.pitch()))?;
    ensure(pitch_name(60).unwrap() == "C4", || "3C is not C4".into())?;
    ensure(pitch_name(21).unwrap() == "A0", || "15 is not A0".into())?;
    let rest = TokenCode::onset(0).unwrap();
    ensure(rest.sustained().to_string() == "80", || {
        "continuation of 00 is not 80".into()
    })?;
    ensure(c4.sustained().to_string() == "BC", || {
        "continuation of 3C is not BC".into()
    })?;
    let units: Vec<u32> = [
        NoteValue::Whole,
        NoteValue::DottedHalf,
        NoteValue::Half,
        NoteValue::Quarter,
    ]
    .map(NoteValue::units)
    .to_vec();
    ensure(units == [32, 24, 16, 8], || {
        format!("note values {units:?}")
    })?;
    // Encoded lengths: a quarter is one onset and seven continuations.
    let quarter = format!("3C{}", " BC".repeat(7));
    let stream = tokenize(&quarter).map_err(|e| e.to_string())?;
    ensure(stream.unit_count() == 8, || {
        "quarter is not 8 tokens".into()
    })?;
    Ok("3C=C4/60, 15=A0/21, 00->80, 32/24/16/8 units".into())
}

fn ac2_round_trip() -> Check {
    let table = DurationTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC2);
    let n = 1000;
    for i in 0..n {
        let text = common::random_ynote_text(&mut rng, &table, 4);
        let doc = parse_ynote(&text, &table).map_err(|e| format!("#{i} parse: {e}"))?;
        let score = ynote_to_hnote(&doc, Default::default()).map_err(|e| format!("#{i}: {e}"))?;
        let back = hnote_to_ynote(&score, &table).map_err(|e| format!("#{i}: {e}"))?;
        ensure(back == doc, || format!("#{i} ynote tokens differ:\n{text}"))?;
        let serialized = score.to_text();
        let again = tokenize(&serialized)
            .map_err(|e| format!("#{i}: {e}"))?
            .to_text();
        ensure(again == serialized, || format!("#{i} hnote text differs"))?;
    }
    Ok(format!("{n}/{n} sequences round-trip"))
}

fn ac3_mutations() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC3);
    let scores = 200;
    let (mut deletions, mut substitutions) = (0usize, 0usize);
    for s in 0..scores {
        let score = common::random_distinct_score(&mut rng, 3, 3);
        let base: Vec<Vec<TokenCode>> = score
            .to_stream()
            .into_lines()
            .into_iter()
            .map(|l| l.codes)
            .collect();
        ensure(
            validate(&TokenStream::from_codes(base.clone())).is_valid(),
            || format!("score {s} is not valid to begin with"),
        )?;
        for (li, line) in base.iter().enumerate() {
            for i in 0..line.len() {
                let mut m = base.clone();
                m[li].remove(i);
                let r = validate(&TokenStream::from_codes(m));
                ensure(r.has(ErrorCategory::IncompleteMeasure), || {
                    format!("score {s} line {li} deletion at {i} not flagged: {r}")
                })?;
                deletions += 1;
                if line[i].is_onset() {
                    let mut m = base.clone();
                    m[li][i] = line[i].sustained();
                    let r = validate(&TokenStream::from_codes(m));
                    ensure(r.has(ErrorCategory::OrphanContinuation), || {
                        format!("score {s} line {li} substitution at {i} not flagged: {r}")
                    })?;
                    substitutions += 1;
                }
            }
        }
    }
    Ok(format!(
        "{scores} scores: {deletions} deletions, {substitutions} substitutions, all flagged"
    ))
}

fn ac4_correctness_rate() -> Check {
    let invalid = ValidationReport::from_errors(vec![ValidationError {
        position: Position::EndOfStream,
        category: ErrorCategory::IncompleteMeasure,
        message: String::new(),
    }]);
    let valid = ValidationReport::from_errors(Vec::new());
    let reports: Vec<&ValidationReport> = std::iter::repeat_n(&valid, 908)
        .chain(std::iter::repeat_n(&invalid, 192))
        .collect();
    let report = correctness_rate(reports);
    let pct = report.rate().ok_or("undefined rate")? * 100.0;
    ensure((pct - 82.5).abs() <= 0.05, || format!("{pct}%"))?;
    ensure(report.percent() == "82.5%", || report.percent())?;
    Ok(report.to_string())
}

fn ac5_metric_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC5);
    let pairs = 200;
    let mut worst = 0.0f64;
    let mut track = |a: f64, b: f64, what: &str| -> Result<(), String> {
        let d = (a - b).abs();
        worst = worst.max(d);
        ensure(d <= 1e-9, || format!("{what}: {a} vs oracle {b}"))
    };
    for _ in 0..pairs {
        let alphabet = rng.gen_range(2..6u8);
        let seq = |rng: &mut ChaCha8Rng| -> Vec<u8> {
            (0..rng.gen_range(1..=12))
                .map(|_| rng.gen_range(0..alphabet))
                .collect()
        };
        let (c, r) = (seq(&mut rng), seq(&mut rng));
        let (ind, cum) = common::oracle_bleu(&c, &r);
        let got_ind = bleu(&c, &r, 4, BleuMode::Individual).map_err(|e| e.to_string())?;
        let got_cum = bleu(&c, &r, 4, BleuMode::Cumulative).map_err(|e| e.to_string())?;
        for n in 0..4 {
            track(got_ind.scores[n], ind[n], "individual BLEU")?;
            track(got_cum.scores[n], cum[n], "cumulative BLEU")?;
        }
        for n in 1..=2 {
            if r.len() >= n {
                let got = rouge_n(&c, &r, n).map_err(|e| e.to_string())?;
                track(got, common::oracle_rouge_n(&c, &r, n), "ROUGE-N")?;
            }
        }
        let l = common::oracle_lcs(&c, &r);
        ensure(lcs_len(&c, &r) == l, || format!("LCS {c:?} {r:?}"))?;
        let rl = rouge_l(&c, &r).map_err(|e| e.to_string())?;
        let (p, rc) = (l as f64 / c.len() as f64, l as f64 / r.len() as f64);
        let f = if l == 0 { 0.0 } else { 2.0 * p * rc / (p + rc) };
        track(rl.precision, p, "ROUGE-L precision")?;
        track(rl.recall, rc, "ROUGE-L recall")?;
        track(rl.f1, f, "ROUGE-L F1")?;

        // Every order needs at least one n-gram for a perfect score.
        let mut long = c.clone();
        long.extend(&r);
        long.extend(&r);
        long.extend(&c);
        let own =
            MetricScores::compute(&long, &long, BleuMode::Individual).map_err(|e| e.to_string())?;
        ensure(own.columns().iter().all(|&v| v == 1.0), || {
            format!("self-comparison of {long:?}: {:?}", own.columns())
        })?;
    }
    Ok(format!(
        "{pairs} pairs, max |delta| = {worst:.1e}, self-comparison 1.0"
    ))
}

fn ac6_equal_length_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC6);
    let pairs = 2000;
    for _ in 0..pairs {
        let len = rng.gen_range(1..=40);
        let alphabet = rng.gen_range(1..8u8);
        let c: Vec<u8> = (0..len).map(|_| rng.gen_range(0..alphabet)).collect();
        let r: Vec<u8> = (0..len).map(|_| rng.gen_range(0..alphabet)).collect();
        let b1 = bleu(&c, &r, 1, BleuMode::Individual)
            .map_err(|e| e.to_string())?
            .scores[0];
        let r1 = rouge_n(&c, &r, 1).map_err(|e| e.to_string())?;
        ensure(b1 == r1, || {
            format!("{c:?} / {r:?}: BLEU-1 {b1} ROUGE-1 {r1}")
        })?;
        if len >= 2 {
            let b2 = bleu(&c, &r, 2, BleuMode::Individual)
                .map_err(|e| e.to_string())?
                .scores[1];
            let r2 = rouge_n(&c, &r, 2).map_err(|e| e.to_string())?;
            ensure(b2 == r2, || {
                format!("{c:?} / {r:?}: BLEU-2 {b2} ROUGE-2 {r2}")
            })?;
        }
    }
    Ok(format!(
        "{pairs} equal-length pairs, BLEU-n == ROUGE-n exactly"
    ))
}

struct LoopOutput {
    texts: Vec<(String, String)>,
    report: String,
}

fn end_to_end(seed: u64) -> Result<LoopOutput, String> {
    let corpus = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC7);
    for i in 0..20 {
        let path = corpus.path().join(format!("piece{i:02}.ynote"));
        fs::write(path, common::toy_piece(&mut rng)).map_err(|e| e.to_string())?;
    }
    let table = DurationTable::default();
    let ds = build_dataset(corpus.path(), &table, SplitRatios::default(), seed)
        .map_err(|e| e.to_string())?;
    ensure(ds.train.len() + ds.eval.len() == 20, || {
        "dataset lost pieces".into()
    })?;
    let train: Vec<Score> = ds
        .train
        .iter()
        .map(|r| Score::parse(&r.completion))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let model = NgramModel::train(&train, 3, 0.1).map_err(|e| e.to_string())?;

    let mut texts = Vec::new();
    let mut references = BTreeMap::new();
    for (pi, rec) in ds.train.iter().chain(&ds.eval).enumerate() {
        let reference = Score::parse(&rec.completion).map_err(|e| e.to_string())?;
        let prompt = extract_prompts(&reference);
        references.insert(rec.id.clone(), rec.completion.clone());
        for k in 0..5u64 {
            let config = GenerateConfig {
                seed: seed ^ ((pi as u64) << 8 | k),
                ..Default::default()
            };
            let piece = model.generate(&prompt, &config);
            let lines = piece.stream.lines();
            ensure(lines.len() == prompt.lines.len(), || {
                "line count differs".into()
            })?;
            for (li, (line, lp)) in lines.iter().zip(&prompt.lines).enumerate() {
                let id = format!("{}__{k} line {li}", rec.id);
                ensure(line.codes.len() == lp.measures * 32, || {
                    format!(
                        "{id}: {} units for {} measures",
                        line.codes.len(),
                        lp.measures
                    )
                })?;
                ensure(line.codes[0] == lp.first, || format!("{id}: first note"))?;
                let last = line.codes.iter().rev().find(|c| c.is_onset()).copied();
                ensure(last == Some(lp.last), || format!("{id}: last note"))?;
            }
            texts.push((format!("{}__{k}", rec.id), piece.to_text()));
        }
    }
    let outcome = score_texts(&texts, &references, BleuMode::Individual);
    if let Some((id, r)) = outcome.validations.iter().find(|(_, r)| !r.is_valid()) {
        return Err(format!("untruncated generation {id} is invalid: {r}"));
    }
    ensure(outcome.issues.is_empty(), || {
        format!("{:?}", outcome.issues)
    })?;
    ensure(outcome.rows.len() == outcome.correctness.valid, || {
        "unscored valid pieces".into()
    })?;
    for row in &outcome.rows {
        ensure(
            row.scores.columns().iter().all(|v| (0.0..=1.0).contains(v)),
            || format!("{} out of range: {:?}", row.id, row.scores.columns()),
        )?;
    }
    let report = format!(
        "{}\n{}",
        render_correctness(&outcome.correctness),
        render_text(&outcome.rows)
    );
    ensure(
        report.contains("BLEU\n") && report.contains("ROUGE\n"),
        || "report shape".into(),
    )?;
    Ok(LoopOutput { texts, report })
}

fn ac7_end_to_end() -> Check {
    let a = end_to_end(7)?;
    let b = end_to_end(7)?;
    ensure(a.texts == b.texts && a.report == b.report, || {
        "runs differ under one seed".into()
    })?;
    let first_line = a.report.lines().next().unwrap_or_default().to_string();
    Ok(format!(
        "{} pieces generated, {first_line}, deterministic",
        a.texts.len()
    ))
}

fn ac8_midi_golden() -> Check {
    let text = format!("3C{} 00{}", " BC".repeat(7), " 80".repeat(23));
    let score = Score::parse(&text).map_err(|e| e.to_string())?;
    let cfg = ExportConfig {
        tempo_us_per_beat: ExportConfig::tempo_from_bpm(60.0).map_err(|e| e.to_string())?,
        ..Default::default()
    };
    let bytes = export_midi(&score, &cfg).map_err(|e| e.to_string())?;
    #[rustfmt::skip]
    let golden: &[u8] = &[
        b'M', b'T', b'h', b'd', 0, 0, 0, 6, 0, 0, 0, 1, 0x01, 0xE0,
        b'M', b'T', b'r', b'k', 0, 0, 0, 32,
        0x00, 0xFF, 0x51, 0x03, 0x0F, 0x42, 0x40,
        0x00, 0xFF, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08,
        0x00, 0xC0, 0x00,
        0x00, 0x90, 0x3C, 0x5A,
        0x83, 0x60, 0x80, 0x3C, 0x00,
        0x8B, 0x20, 0xFF, 0x2F, 0x00,
    ];
    ensure(bytes == golden, || format!("bytes differ: {bytes:02X?}"))?;
    let again = export_midi(&score, &cfg).map_err(|e| e.to_string())?;
    ensure(bytes == again, || "output differs across runs".into())?;
    Ok("on(60,v=90)@0, off@480, byte-identical".into())
}

fn ac9_dataset_consistency() -> Check {
    let corpus = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC9);
    let table = DurationTable::default();
    for i in 0..30 {
        let text = common::random_ynote_text(&mut rng, &table, 4);
        fs::write(corpus.path().join(format!("r{i:02}.ynote")), text).map_err(|e| e.to_string())?;
    }
    for i in 0..10 {
        fs::write(
            corpus.path().join(format!("t{i:02}.ynote")),
            common::toy_piece(&mut rng),
        )
        .map_err(|e| e.to_string())?;
    }
    build_dataset(corpus.path(), &table, SplitRatios::default(), 9)
        .and_then(|ds| ds.write_to(out.path()))
        .map_err(|e| e.to_string())?;
    let mut n = 0;
    for f in ["train.jsonl", "eval.jsonl"] {
        let text = fs::read_to_string(out.path().join(f)).map_err(|e| e.to_string())?;
        for rec in from_jsonl(&text).map_err(|e| e.to_string())? {
            let v = validate_text(&rec.completion);
            ensure(v.is_valid(), || format!("{}: {v}", rec.id))?;
            let score = Score::parse(&rec.completion).map_err(|e| e.to_string())?;
            ensure(extract_prompts(&score).render() == rec.prompt, || {
                format!("{}: prompt mismatch", rec.id)
            })?;
            n += 1;
        }
    }
    ensure(n == 40, || format!("{n} records, expected 40"))?;
    Ok(format!("{n}/{n} records self-consistent"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("AC1", "encoding anchors", ac1_encoding_anchors),
        ("AC2", "lossless round trip", ac2_round_trip),
        ("AC3", "validator mutation suite", ac3_mutations),
        ("AC4", "correctness-rate arithmetic", ac4_correctness_rate),
        ("AC5", "metric oracle equivalence", ac5_metric_oracle),
        (
            "AC6",
            "equal-length BLEU/ROUGE identity",
            ac6_equal_length_identity,
        ),
        ("AC7", "end-to-end baseline loop", ac7_end_to_end),
        ("AC8", "MIDI golden file", ac8_midi_golden),
        ("AC9", "dataset self-consistency", ac9_dataset_consistency),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match result {
            Ok(detail) => println!("PASS {id} {name}: {detail} ({ms} ms)"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {name}: {why} ({ms} ms)");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
