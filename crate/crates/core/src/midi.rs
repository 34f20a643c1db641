//! Standard MIDI File (format 0) rendering of a score.
//!
//! Onset codes are MIDI note numbers, so a note's pitch is written as is.
//! One HNote unit is `ppq / 8` ticks. Lines play back to back.

use crate::error::{HnoteError, Result};
use crate::score::{assemble_notes, Score};
use crate::token::{UNITS_PER_BEAT, UNITS_PER_MEASURE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExportConfig {
    /// Ticks per quarter note; must be a multiple of 8.
    pub ppq: u16,
    pub tempo_us_per_beat: u32,
    pub channel: u8,
    pub velocity: u8,
    pub program: u8,
}

impl Default for ExportConfig {
    fn default() -> Self {
        ExportConfig {
            ppq: 480,
            tempo_us_per_beat: 1_000_000,
            channel: 0,
            velocity: 90,
            program: 0,
        }
    }
}

impl ExportConfig {
    /// Microseconds per beat for a tempo in BPM.
    pub fn tempo_from_bpm(bpm: f64) -> Result<u32> {
        if !(bpm.is_finite() && bpm > 0.0) {
            return Err(HnoteError::BadConfig(format!(
                "tempo {bpm} BPM must be positive"
            )));
        }
        Ok((60_000_000.0 / bpm).round() as u32)
    }

    pub fn ticks_per_unit(&self) -> u32 {
        self.ppq as u32 / UNITS_PER_BEAT as u32
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(HnoteError::BadConfig(m));
        if self.ppq == 0 || !self.ppq.is_multiple_of(UNITS_PER_BEAT as u16) || self.ppq >= 0x8000 {
            return bad(format!(
                "ppq {} must be a positive multiple of 8 below 32768",
                self.ppq
            ));
        }
        if self.tempo_us_per_beat == 0 || self.tempo_us_per_beat > 0xFF_FFFF {
            return bad(format!(
                "tempo {} us/beat does not fit 24 bits",
                self.tempo_us_per_beat
            ));
        }
        if self.channel > 15 {
            return bad(format!("channel {} is outside 0..=15", self.channel));
        }
        if !(1..=127).contains(&self.velocity) {
            return bad(format!("velocity {} is outside 1..=127", self.velocity));
        }
        if self.program > 127 {
            return bad(format!("program {} is outside 0..=127", self.program));
        }
        Ok(())
    }
}

/// Appends `value` as a MIDI variable-length quantity.
pub fn write_vlq(buf: &mut Vec<u8>, value: u32) {
    debug_assert!(value < 1 << 28);
    let mut started = false;
    for shift in [21, 14, 7] {
        let group = (value >> shift) & 0x7F;
        if started || group != 0 {
            buf.push(group as u8 | 0x80);
            started = true;
        }
    }
    buf.push((value & 0x7F) as u8);
}

pub fn export_midi(score: &Score, config: &ExportConfig) -> Result<Vec<u8>> {
    config.check()?;
    let tpu = config.ticks_per_unit();
    let ch = config.channel;

    // (tick, bytes); note-offs sort before note-ons at the same tick.
    let mut events: Vec<(u32, [u8; 3])> = Vec::new();
    let mut line_start = 0u32;
    let notes = assemble_notes(score);
    let mut note_iter = notes.iter().peekable();
    for (line_idx, line) in score.lines().iter().enumerate() {
        while let Some(note) = note_iter.next_if(|n| n.start.line == line_idx) {
            if note.is_rest() {
                continue;
            }
            let on = line_start + note.start.line_offset() as u32 * tpu;
            let off = on + note.duration_units * tpu;
            events.push((on, [0x90 | ch, note.pitch, config.velocity]));
            events.push((off, [0x80 | ch, note.pitch, 0]));
        }
        line_start += line.unit_count() as u32 * tpu;
    }
    events.sort_by_key(|&(tick, msg)| (tick, msg[0] & 0xF0 == 0x90));

    let mut track = Vec::new();
    let tempo = config.tempo_us_per_beat.to_be_bytes();
    track.extend([0x00, 0xFF, 0x51, 0x03, tempo[1], tempo[2], tempo[3]]);
    // 4/4, 24 clocks per click, 8 32nds per quarter.
    track.extend([0x00, 0xFF, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08]);
    track.extend([0x00, 0xC0 | ch, config.program]);
    let mut now = 0;
    for (tick, msg) in events {
        write_vlq(&mut track, tick - now);
        track.extend(msg);
        now = tick;
    }
    write_vlq(&mut track, line_start - now);
    track.extend([0xFF, 0x2F, 0x00]);

    let mut out = Vec::with_capacity(22 + track.len());
    out.extend(b"MThd");
    out.extend(6u32.to_be_bytes());
    out.extend(0u16.to_be_bytes());
    out.extend(1u16.to_be_bytes());
    out.extend(config.ppq.to_be_bytes());
    out.extend(b"MTrk");
    out.extend((track.len() as u32).to_be_bytes());
    out.extend(track);
    Ok(out)
}

/// Ticks spanned by `score` under `config`.
pub fn total_ticks(score: &Score, config: &ExportConfig) -> u64 {
    score.measure_count() as u64 * UNITS_PER_MEASURE as u64 * config.ticks_per_unit() as u64
}
