//! Order-k Markov baseline over HNote units.
//!
//! Lines are padded with `k - 1` line-start sentinels, a bar sentinel is
//! inserted between measures and a line-end sentinel closes each line.
//! Counts are kept for every context length below `k` so that unseen
//! contexts can back off to shorter ones.
//!
//! Generation works on raw units and never checks note structure, so its
//! output can fail validation exactly the way a free-running sequence
//! model's output can.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{LinePrompt, PromptSpec};
use crate::error::{HnoteError, Result};
use crate::score::Score;
use crate::token::{ParseTokenError, TokenCode, UNITS_PER_BEAT, UNITS_PER_MEASURE};
use crate::tokenize::{TokenLine, TokenStream};

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_MAX_RETRIES: u32 = 64;

const HEADER_PREFIX: &str = "#hnote-ngram v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    LineStart,
    Bar,
    LineEnd,
    Token(TokenCode),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::LineStart => f.write_str("<s>"),
            Symbol::Bar => f.write_str("|"),
            Symbol::LineEnd => f.write_str("</s>"),
            Symbol::Token(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for Symbol {
    type Err = ParseTokenError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseTokenError> {
        match s {
            "<s>" => Ok(Symbol::LineStart),
            "|" => Ok(Symbol::Bar),
            "</s>" => Ok(Symbol::LineEnd),
            hex => hex.parse().map(Symbol::Token),
        }
    }
}

type Counts = BTreeMap<Vec<Symbol>, BTreeMap<Symbol, u64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    order: usize,
    alpha: f64,
    counts: Counts,
    vocab: Vec<TokenCode>,
}

/// Knobs for one generation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateConfig {
    pub seed: u64,
    pub max_retries: u32,
    /// Probability of cutting the finished piece at a random unit. This
    /// synthesizes incomplete output for pipeline testing; pieces cut this
    /// way are flagged in [`GeneratedPiece::truncated_at`].
    pub truncate_probability: f64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            seed: 0,
            max_retries: DEFAULT_MAX_RETRIES,
            truncate_probability: 0.0,
        }
    }
}

/// How the prompt constraints fared on one line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineReport {
    pub first_satisfied: bool,
    /// Last-note constraint met by sampling alone (possibly after retries).
    pub last_satisfied_before_patch: bool,
    pub last_satisfied: bool,
    pub retries: u32,
    pub patched: bool,
    /// Prompt codes absent from the vocabulary, with the nearest observed
    /// onset used in their place for conditioning.
    pub first_fallback: Option<TokenCode>,
    pub last_fallback: Option<TokenCode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPiece {
    pub stream: TokenStream,
    pub lines: Vec<LineReport>,
    /// Unit index at which a synthetic truncation cut the piece.
    pub truncated_at: Option<usize>,
}

impl GeneratedPiece {
    pub fn to_text(&self) -> String {
        self.stream.to_text()
    }
}

fn line_symbols(units: impl IntoIterator<Item = TokenCode>, order: usize) -> Vec<Symbol> {
    let mut seq = vec![Symbol::LineStart; order - 1];
    for (i, u) in units.into_iter().enumerate() {
        if i > 0 && i % UNITS_PER_MEASURE == 0 {
            seq.push(Symbol::Bar);
        }
        seq.push(Symbol::Token(u));
    }
    seq
}

impl NgramModel {
    pub fn train(corpus: &[Score], order: usize, alpha: f64) -> Result<Self> {
        if corpus.is_empty() {
            return Err(HnoteError::EmptyCorpus);
        }
        check_params(order, alpha)?;
        let mut counts = Counts::new();
        for score in corpus {
            for line in score.lines() {
                let mut seq = line_symbols(line.units(), order);
                seq.push(Symbol::LineEnd);
                for i in order - 1..seq.len() {
                    for m in 0..order {
                        *counts
                            .entry(seq[i - m..i].to_vec())
                            .or_default()
                            .entry(seq[i])
                            .or_insert(0) += 1;
                    }
                }
            }
        }
        Ok(Self::from_counts(order, alpha, counts))
    }

    fn from_counts(order: usize, alpha: f64, counts: Counts) -> Self {
        let vocab = counts
            .get(&Vec::new())
            .into_iter()
            .flat_map(|next| next.keys())
            .filter_map(|s| match s {
                Symbol::Token(t) => Some(*t),
                _ => None,
            })
            .collect();
        NgramModel {
            order,
            alpha,
            counts,
            vocab,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Observed unit codes, ascending.
    pub fn vocab(&self) -> &[TokenCode] {
        &self.vocab
    }

    pub fn count(&self, context: &[Symbol], next: Symbol) -> u64 {
        self.counts
            .get(context)
            .and_then(|n| n.get(&next))
            .copied()
            .unwrap_or(0)
    }

    pub fn contexts(&self) -> impl Iterator<Item = (&[Symbol], &BTreeMap<Symbol, u64>)> {
        self.counts.iter().map(|(c, n)| (c.as_slice(), n))
    }

    /// Sampling distribution over [`vocab`](Self::vocab) after `history`.
    ///
    /// Uses the longest suffix of `history` (at most `order - 1` symbols)
    /// that was seen followed by some unit, with add-α smoothing over the
    /// vocabulary. With α = 0 this is plain backoff to shorter contexts.
    pub fn distribution(&self, history: &[Symbol]) -> Vec<(TokenCode, f64)> {
        let max = (self.order - 1).min(history.len());
        for m in (0..=max).rev() {
            let Some(next) = self.counts.get(&history[history.len() - m..]) else {
                continue;
            };
            let seen: u64 = next
                .iter()
                .filter(|(s, _)| matches!(s, Symbol::Token(_)))
                .map(|(_, c)| c)
                .sum();
            if seen == 0 {
                continue;
            }
            let denom = seen as f64 + self.alpha * self.vocab.len() as f64;
            return self
                .vocab
                .iter()
                .map(|&t| {
                    let c = next.get(&Symbol::Token(t)).copied().unwrap_or(0) as f64;
                    (t, (c + self.alpha) / denom)
                })
                .collect();
        }
        unreachable!("a trained model has unit counts for the empty context")
    }

    /// Draws the unit after `prev` from the units that may legally follow
    /// it. With no mass on any legal unit the previous note is sustained.
    fn sample(&self, history: &[Symbol], prev: TokenCode, rng: &mut ChaCha8Rng) -> TokenCode {
        let dist: Vec<(TokenCode, f64)> = self
            .distribution(history)
            .into_iter()
            .filter(|(t, p)| *p > 0.0 && t.may_follow(prev))
            .collect();
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        let Some(&(fallback, _)) = dist.last() else {
            return prev.sustained();
        };
        let mut x = rng.gen::<f64>() * total;
        for &(t, p) in &dist {
            if x < p {
                return t;
            }
            x -= p;
        }
        fallback
    }

    /// Closest observed onset to `code`, lower pitch on ties.
    fn nearest_onset(&self, code: TokenCode) -> Option<TokenCode> {
        self.vocab
            .iter()
            .copied()
            .filter(|t| t.is_onset())
            .min_by_key(|t| (t.pitch().abs_diff(code.pitch()), t.pitch()))
    }

    fn in_vocab(&self, code: TokenCode) -> bool {
        self.vocab.binary_search(&code).is_ok()
    }

    pub fn generate(&self, prompt: &PromptSpec, config: &GenerateConfig) -> GeneratedPiece {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut lines = Vec::with_capacity(prompt.lines.len());
        let mut reports = Vec::with_capacity(prompt.lines.len());
        for lp in &prompt.lines {
            let (codes, report) = self.generate_line(lp, config.max_retries, &mut rng);
            lines.push(TokenLine { codes });
            reports.push(report);
        }
        let mut truncated_at = None;
        let total: usize = lines.iter().map(|l| l.codes.len()).sum();
        if config.truncate_probability > 0.0
            && total > 1
            && rng.gen::<f64>() < config.truncate_probability
        {
            let cut = rng.gen_range(1..total);
            truncate_lines(&mut lines, cut);
            truncated_at = Some(cut);
        }
        GeneratedPiece {
            stream: TokenStream::new(lines),
            lines: reports,
            truncated_at,
        }
    }

    fn generate_line(
        &self,
        prompt: &LinePrompt,
        max_retries: u32,
        rng: &mut ChaCha8Rng,
    ) -> (Vec<TokenCode>, LineReport) {
        let total = prompt.measures * UNITS_PER_MEASURE;
        let first_fallback = (!self.in_vocab(prompt.first))
            .then(|| self.nearest_onset(prompt.first))
            .flatten();
        let last_fallback = (!self.in_vocab(prompt.last))
            .then(|| self.nearest_onset(prompt.last))
            .flatten();
        // Conditioning uses the nearest observed onset for an unseen prompt code.
        let stand_in = |t: TokenCode| match first_fallback {
            Some(f) if t == prompt.first => f,
            _ => t,
        };

        let mut units = vec![prompt.first];
        self.fill(&mut units, total, &stand_in, rng);
        let mut last_onset = last_onset_index(&units);
        let mut ok = units[last_onset] == prompt.last;
        let mut retries = 0;
        while !ok && retries < max_retries && last_fallback.is_none() {
            retries += 1;
            units.truncate(last_onset.max(1));
            self.fill(&mut units, total, &stand_in, rng);
            last_onset = last_onset_index(&units);
            ok = units[last_onset] == prompt.last;
        }
        let before_patch = ok;
        if !ok {
            patch_last_onset(&mut units, last_onset, prompt.last);
        }
        let report = LineReport {
            first_satisfied: units[0] == prompt.first,
            last_satisfied_before_patch: before_patch,
            last_satisfied: units[last_onset_index(&units)] == prompt.last,
            retries,
            patched: !before_patch,
            first_fallback,
            last_fallback,
        };
        (units, report)
    }

    fn fill(
        &self,
        units: &mut Vec<TokenCode>,
        total: usize,
        stand_in: &dyn Fn(TokenCode) -> TokenCode,
        rng: &mut ChaCha8Rng,
    ) {
        let mut history = line_symbols(units.iter().map(|&u| stand_in(u)), self.order);
        while units.len() < total {
            if !units.is_empty() && units.len().is_multiple_of(UNITS_PER_MEASURE) {
                history.push(Symbol::Bar);
            }
            let start = history.len().saturating_sub(self.order - 1);
            let prev = *units.last().expect("lines start with the prompt onset");
            let next = self.sample(&history[start..], prev, rng);
            units.push(next);
            history.push(Symbol::Token(next));
        }
    }

    /// Plain-text count table: a header line, then one
    /// `context<TAB>next<TAB>count` row per entry. Context symbols are
    /// space-separated; the empty context is an empty field.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{HEADER_PREFIX} order={} alpha={}\n",
            self.order, self.alpha
        );
        for (ctx, next) in &self.counts {
            let ctx: Vec<String> = ctx.iter().map(|s| s.to_string()).collect();
            let ctx = ctx.join(" ");
            for (sym, count) in next {
                writeln!(out, "{ctx}\t{sym}\t{count}").unwrap();
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        let bad = |line: usize, reason: &str| HnoteError::ModelFormat {
            line,
            reason: reason.to_string(),
        };
        let params = header
            .strip_prefix(HEADER_PREFIX)
            .ok_or_else(|| bad(1, "missing or unsupported header"))?;
        let mut order = None;
        let mut alpha = None;
        for field in params.split_whitespace() {
            match field.split_once('=') {
                Some(("order", v)) => order = v.parse::<usize>().ok(),
                Some(("alpha", v)) => alpha = v.parse::<f64>().ok(),
                _ => return Err(bad(1, "unknown header field")),
            }
        }
        let order = order.ok_or_else(|| bad(1, "bad order"))?;
        let alpha = alpha.ok_or_else(|| bad(1, "bad alpha"))?;
        check_params(order, alpha)?;
        let mut counts = Counts::new();
        for (i, row) in lines.enumerate() {
            let line = i + 2;
            if row.is_empty() {
                continue;
            }
            let mut cols = row.split('\t');
            let (Some(ctx), Some(next), Some(count), None) =
                (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(bad(line, "expected three tab-separated columns"));
            };
            let ctx: Vec<Symbol> = ctx
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| bad(line, "bad context symbol")))
                .collect::<Result<_>>()?;
            if ctx.len() >= order {
                return Err(bad(line, "context longer than order - 1"));
            }
            let next: Symbol = next.parse().map_err(|_| bad(line, "bad next symbol"))?;
            let count: u64 = count
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| bad(line, "count must be a positive integer"))?;
            counts.entry(ctx).or_default().insert(next, count);
        }
        let has_units = counts
            .get(&Vec::new())
            .is_some_and(|n| n.keys().any(|s| matches!(s, Symbol::Token(_))));
        if !has_units {
            return Err(HnoteError::EmptyCorpus);
        }
        Ok(Self::from_counts(order, alpha, counts))
    }
}

fn check_params(order: usize, alpha: f64) -> Result<()> {
    if order == 0 {
        return Err(HnoteError::BadConfig(
            "n-gram order must be at least 1".into(),
        ));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(HnoteError::BadConfig(format!(
            "smoothing {alpha} must be finite and >= 0"
        )));
    }
    Ok(())
}

fn last_onset_index(units: &[TokenCode]) -> usize {
    units.iter().rposition(|u| u.is_onset()).unwrap_or(0)
}

/// Forces the line's final note to start on `target`. A final note that
/// is also the line's first note is left alone and a closing beat of
/// `target` is written over the end of the line instead.
fn patch_last_onset(units: &mut [TokenCode], last_onset: usize, target: TokenCode) {
    if last_onset == 0 {
        let start = units.len() - UNITS_PER_BEAT;
        units[start] = target;
        for u in &mut units[start + 1..] {
            *u = target.sustained();
        }
        return;
    }
    let old = units[last_onset];
    units[last_onset] = target;
    for u in &mut units[last_onset + 1..] {
        if *u != old.sustained() {
            break;
        }
        *u = target.sustained();
    }
}

fn truncate_lines(lines: &mut Vec<TokenLine>, mut keep: usize) {
    let mut n_lines = 0;
    for line in lines.iter_mut() {
        if keep == 0 {
            break;
        }
        let take = keep.min(line.codes.len());
        line.codes.truncate(take);
        keep -= take;
        n_lines += 1;
    }
    lines.truncate(n_lines);
}
