//! Shared generators and brute-force oracles for the integration tests.
//! Oracles here deliberately avoid the library's own algorithms.
#![allow(dead_code)]

use hnote_core::{emit_tokens, DurationTable, Note, NoteStart, Score};
use rand::seq::SliceRandom;
use rand::Rng;

/// Clipped n-gram match count by explicit enumeration and linear scans.
pub fn oracle_clipped(candidate: &[u8], reference: &[u8], n: usize) -> usize {
    let grams = |s: &[u8]| -> Vec<Vec<u8>> {
        if s.len() < n {
            return Vec::new();
        }
        (0..=s.len() - n).map(|i| s[i..i + n].to_vec()).collect()
    };
    let cand = grams(candidate);
    let refs = grams(reference);
    let mut distinct: Vec<Vec<u8>> = Vec::new();
    for g in &cand {
        if !distinct.contains(g) {
            distinct.push(g.clone());
        }
    }
    distinct
        .iter()
        .map(|g| {
            let in_cand = cand.iter().filter(|x| *x == g).count();
            let in_ref = refs.iter().filter(|x| *x == g).count();
            in_cand.min(in_ref)
        })
        .sum()
}

pub fn oracle_count(len: usize, n: usize) -> usize {
    if len >= n {
        len - n + 1
    } else {
        0
    }
}

pub fn oracle_bp(c: usize, r: usize) -> f64 {
    if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

/// BLEU-1..=4, individual (pₙ × BP) and cumulative.
pub fn oracle_bleu(candidate: &[u8], reference: &[u8]) -> ([f64; 4], [f64; 4]) {
    let bp = oracle_bp(candidate.len(), reference.len());
    let mut p = [0.0; 4];
    for n in 1..=4 {
        let total = oracle_count(candidate.len(), n);
        p[n - 1] = if total == 0 {
            0.0
        } else {
            oracle_clipped(candidate, reference, n) as f64 / total as f64
        };
    }
    let individual = p.map(|x| x * bp);
    let mut cumulative = [0.0; 4];
    for n in 1..=4 {
        let prod: f64 = p[..n].iter().product();
        cumulative[n - 1] = if prod == 0.0 {
            0.0
        } else {
            bp * prod.powf(1.0 / n as f64)
        };
    }
    (individual, cumulative)
}

pub fn oracle_rouge_n(candidate: &[u8], reference: &[u8], n: usize) -> f64 {
    oracle_clipped(candidate, reference, n) as f64 / oracle_count(reference.len(), n) as f64
}

fn is_subsequence(needle: &[u8], hay: &[u8]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|x| it.any(|y| y == x))
}

/// LCS length by trying every subsequence of the shorter input.
pub fn oracle_lcs(a: &[u8], b: &[u8]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    assert!(short.len() <= 16, "exhaustive oracle is exponential");
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let len = mask.count_ones() as usize;
        if len <= best {
            continue;
        }
        let sub: Vec<u8> = (0..short.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| short[i])
            .collect();
        if is_subsequence(&sub, long) {
            best = len;
        }
    }
    best
}

/// Canonical YNote text of `lines` of random bar-aligned tokens.
pub fn random_ynote_text<R: Rng>(rng: &mut R, table: &DurationTable, max_lines: usize) -> String {
    let codes: Vec<(String, u32)> = (1..=99)
        .filter_map(|i| {
            let code = format!("{i:02}");
            let dc = hnote_core::DurationCode::new(&code)?;
            table.units(dc).map(|u| (code, u))
        })
        .collect();
    let mut out = String::new();
    for _ in 0..rng.gen_range(1..=max_lines) {
        let mut remaining = 32 * rng.gen_range(1..=4u32);
        let mut words = Vec::new();
        while remaining > 0 {
            let fitting: Vec<&(String, u32)> =
                codes.iter().filter(|(_, u)| *u <= remaining).collect();
            let (code, units) = fitting.choose(rng).unwrap();
            let pitch: u8 = if rng.gen_bool(0.15) {
                0
            } else {
                rng.gen_range(0..=0x7F)
            };
            words.push(format!("{pitch:02X}{code}"));
            remaining -= units;
        }
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    out
}

const DURATIONS: [u32; 10] = [1, 2, 4, 6, 8, 12, 16, 24, 32, 40];

/// A random valid score in which no two adjacent notes on a line share a
/// pitch. Notes may cross barlines.
pub fn random_distinct_score<R: Rng>(rng: &mut R, max_lines: usize, max_measures: u32) -> Score {
    let mut notes = Vec::new();
    for line in 0..rng.gen_range(1..=max_lines) {
        let mut remaining = 32 * rng.gen_range(1..=max_measures);
        let mut prev: Option<u8> = None;
        while remaining > 0 {
            let fitting: Vec<u32> = DURATIONS
                .iter()
                .copied()
                .filter(|&d| d <= remaining)
                .collect();
            let d = *fitting.choose(rng).unwrap();
            let pitch = loop {
                let p: u8 = if rng.gen_bool(0.1) {
                    0
                } else {
                    rng.gen_range(0x15..=0x6C)
                };
                if Some(p) != prev {
                    break p;
                }
            };
            prev = Some(pitch);
            notes.push(Note {
                pitch,
                duration_units: d,
                start: NoteStart {
                    line,
                    measure: 0,
                    unit: 0,
                },
            });
            remaining -= d;
        }
    }
    emit_tokens(&notes).unwrap()
}

const SCALE: [u8; 8] = [0x39, 0x3C, 0x3E, 0x40, 0x43, 0x45, 0x48, 0x4A];

/// A pentatonic-ish toy melody in YNote form: 2–4 lines of 2 measures.
pub fn toy_piece<R: Rng>(rng: &mut R) -> String {
    // quarter, eighth, half, dotted quarter
    let values: [(&str, u32); 4] = [("01", 8), ("05", 4), ("02", 16), ("08", 12)];
    let mut out = String::new();
    let mut idx = rng.gen_range(2..6usize);
    for _ in 0..rng.gen_range(2..=4) {
        let mut remaining = 64;
        let mut words = Vec::new();
        while remaining > 0 {
            let fitting: Vec<_> = values.iter().filter(|(_, u)| *u <= remaining).collect();
            let (code, units) = fitting.choose(rng).unwrap();
            let step: i32 = rng.gen_range(-2..=2);
            idx = (idx as i32 + step).clamp(0, SCALE.len() as i32 - 1) as usize;
            let pitch = if rng.gen_bool(0.05) { 0 } else { SCALE[idx] };
            words.push(format!("{pitch:02X}{code}"));
            remaining -= units;
        }
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    out
}
