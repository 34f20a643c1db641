//! Sequence similarity metrics and the syntactic correctness rate.
//!
//! All metrics compare one candidate against one reference over plain
//! token sequences; measure and line delimiters never take part. No
//! smoothing is applied: an n-gram order with no matches scores 0.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{HnoteError, Result};
use crate::validate::{ErrorCategory, ValidationReport};

pub const MAX_BLEU_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum BleuMode {
    /// BLEU-n = pₙ × BP.
    #[default]
    Individual,
    /// BLEU-n = BP × exp(mean of ln pₖ for k ≤ n).
    Cumulative,
}

impl FromStr for BleuMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "individual" => Ok(BleuMode::Individual),
            "cumulative" => Ok(BleuMode::Cumulative),
            other => Err(format!("unknown BLEU mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BleuScores {
    /// BLEU-1..=max_n under the requested mode.
    pub scores: Vec<f64>,
    /// Modified (clipped) n-gram precisions p₁..=pₙ.
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
}

fn ngram_counts<T: Eq + Hash>(seq: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n > 0 && seq.len() >= n {
        for w in seq.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Number of candidate n-grams matched in the reference, each reference
/// n-gram usable at most as often as it occurs there.
fn clipped_matches<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> usize {
    let reference = ngram_counts(reference, n);
    ngram_counts(candidate, n)
        .into_iter()
        .map(|(gram, c)| c.min(reference.get(gram).copied().unwrap_or(0)))
        .sum()
}

fn ngram_total(len: usize, n: usize) -> usize {
    (len + 1).saturating_sub(n)
}

/// `min(1, exp(1 - |ref| / |cand|))`.
pub fn brevity_penalty(candidate_len: usize, reference_len: usize) -> f64 {
    if candidate_len >= reference_len {
        1.0
    } else {
        (1.0 - reference_len as f64 / candidate_len as f64).exp()
    }
}

pub fn bleu<T: Eq + Hash>(
    candidate: &[T],
    reference: &[T],
    max_n: usize,
    mode: BleuMode,
) -> Result<BleuScores> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(HnoteError::EmptySequence);
    }
    if !(1..=MAX_BLEU_ORDER).contains(&max_n) {
        return Err(HnoteError::BadOrder(max_n));
    }
    let bp = brevity_penalty(candidate.len(), reference.len());
    let precisions: Vec<f64> = (1..=max_n)
        .map(|n| match ngram_total(candidate.len(), n) {
            0 => 0.0,
            total => clipped_matches(candidate, reference, n) as f64 / total as f64,
        })
        .collect();
    let scores = match mode {
        BleuMode::Individual => precisions.iter().map(|p| p * bp).collect(),
        BleuMode::Cumulative => (1..=max_n)
            .map(|n| {
                let ps = &precisions[..n];
                if ps.contains(&0.0) {
                    0.0
                } else {
                    bp * (ps.iter().map(|p| p.ln()).sum::<f64>() / n as f64).exp()
                }
            })
            .collect(),
    };
    Ok(BleuScores {
        scores,
        precisions,
        brevity_penalty: bp,
    })
}

/// ROUGE-N recall: clipped n-gram matches over the reference n-gram count.
pub fn rouge_n<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> Result<f64> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(HnoteError::EmptySequence);
    }
    if n == 0 || reference.len() < n {
        return Err(HnoteError::ReferenceTooShort {
            n,
            len: reference.len(),
        });
    }
    let total = ngram_total(reference.len(), n);
    Ok(clipped_matches(candidate, reference, n) as f64 / total as f64)
}

/// Length of the longest common subsequence, `O(|a|·|b|)` time and
/// `O(min(|a|, |b|))` space.
pub fn lcs_len<T: Eq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut row = vec![0usize; short.len() + 1];
    for x in long {
        let mut diag = 0;
        for (j, y) in short.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[short.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RougeL {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn rouge_l<T: Eq>(candidate: &[T], reference: &[T]) -> Result<RougeL> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(HnoteError::EmptySequence);
    }
    let l = lcs_len(candidate, reference) as f64;
    let precision = l / candidate.len() as f64;
    let recall = l / reference.len() as f64;
    let f1 = if l == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(RougeL {
        precision,
        recall,
        f1,
    })
}

/// Every metric reported for one candidate/reference pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricScores {
    pub bleu: [f64; 4],
    pub brevity_penalty: f64,
    /// ROUGE-1 and ROUGE-2 recall. An order longer than the reference
    /// scores 0.
    pub rouge_n: [f64; 2],
    pub rouge_l: RougeL,
}

impl MetricScores {
    pub fn compute<T: Eq + Hash>(candidate: &[T], reference: &[T], mode: BleuMode) -> Result<Self> {
        let b = bleu(candidate, reference, MAX_BLEU_ORDER, mode)?;
        let rouge = |n| match rouge_n(candidate, reference, n) {
            Err(HnoteError::ReferenceTooShort { .. }) => Ok(0.0),
            other => other,
        };
        Ok(MetricScores {
            bleu: b.scores.try_into().expect("four orders"),
            brevity_penalty: b.brevity_penalty,
            rouge_n: [rouge(1)?, rouge(2)?],
            rouge_l: rouge_l(candidate, reference)?,
        })
    }

    /// Values in table column order: BLEU-1..4, ROUGE-1, ROUGE-2, ROUGE-L F1.
    pub fn columns(&self) -> [f64; 7] {
        let [b1, b2, b3, b4] = self.bleu;
        [
            b1,
            b2,
            b3,
            b4,
            self.rouge_n[0],
            self.rouge_n[1],
            self.rouge_l.f1,
        ]
    }
}

/// Share of pieces that pass validation, with error causes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CorrectnessReport {
    pub total: usize,
    pub valid: usize,
    /// Number of invalid pieces exhibiting each category (a piece with
    /// several categories counts once under each).
    pub error_histogram: BTreeMap<ErrorCategory, usize>,
}

impl CorrectnessReport {
    /// `valid / total`, or `None` for an empty batch.
    pub fn rate(&self) -> Option<f64> {
        (self.total > 0).then(|| self.valid as f64 / self.total as f64)
    }

    /// The rate with an empty batch reported as 0.
    pub fn rate_or_zero(&self) -> f64 {
        self.rate().unwrap_or(0.0)
    }

    pub fn is_defined(&self) -> bool {
        self.total > 0
    }

    /// Percentage with one decimal, e.g. `"82.5%"`.
    pub fn percent(&self) -> String {
        format!("{:.1}%", self.rate_or_zero() * 100.0)
    }

    pub fn add(&mut self, report: &ValidationReport) {
        self.total += 1;
        if report.is_valid() {
            self.valid += 1;
        }
        for cat in report.categories() {
            *self.error_histogram.entry(cat).or_insert(0) += 1;
        }
    }
}

impl fmt::Display for CorrectnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} valid ({}", self.valid, self.total, self.percent())?;
        if !self.is_defined() {
            f.write_str(", undefined")?;
        }
        f.write_str(")")
    }
}

pub fn correctness_rate<'a>(
    reports: impl IntoIterator<Item = &'a ValidationReport>,
) -> CorrectnessReport {
    let mut out = CorrectnessReport::default();
    for r in reports {
        out.add(r);
    }
    out
}
