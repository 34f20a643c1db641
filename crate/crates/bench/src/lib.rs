//! Synthetic inputs shared by the benchmarks.

use hnote_core::{emit_tokens, Note, NoteStart, Score};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DURATIONS: [u32; 6] = [4, 8, 8, 12, 16, 32];

/// A random melody of `lines` lines, `measures` measures each.
pub fn melody(seed: u64, lines: usize, measures: u32) -> Score {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut notes = Vec::new();
    for line in 0..lines {
        let mut remaining = measures * 32;
        let mut pitch: i32 = 60;
        while remaining > 0 {
            let fits: Vec<u32> = DURATIONS
                .iter()
                .copied()
                .filter(|&d| d <= remaining)
                .collect();
            let d = *fits.choose(&mut rng).unwrap();
            pitch = (pitch + rng.gen_range(-4..=4)).clamp(48, 84);
            notes.push(Note {
                pitch: pitch as u8,
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
    emit_tokens(&notes).expect("durations fill whole measures")
}
