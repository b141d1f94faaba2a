//! Synthetic lesson audio with known ground truth.
//!
//! A lesson alternates spoken explanation (band-limited noise with a syllable
//! envelope on the voice stem) and played phrases (harmonic tones on the
//! instrument stem), separated by short pauses. Both stems carry a faint
//! noise floor so silence is never digitally perfect.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::{AudioBuffer, CANONICAL_RATE};
use crate::notes::midi_to_freq;
use crate::segmentation::{round_time, LearningState, Region, RegionSource, Track};
use crate::separation::StemPair;

const RATE: f64 = CANONICAL_RATE as f64;
const NOISE_FLOOR: f64 = 0.001;
/// A minor pentatonic across two octaves, in guitar lead range.
const SCALE: [u8; 11] = [57, 60, 62, 64, 67, 69, 72, 74, 76, 79, 81];

fn samples_for(seconds: f64) -> usize {
    (seconds * RATE).round() as usize
}

/// Harmonic tone: fundamental plus two weaker overtones, with short linear
/// attack and release ramps.
pub fn tone(freq: f64, seconds: f64, amplitude: f64) -> Vec<f32> {
    let n = samples_for(seconds);
    let ramp = samples_for(0.01).max(1).min(n / 2 + 1);
    (0..n)
        .map(|i| {
            let t = i as f64 / RATE;
            let env = (i.min(n - 1 - i) as f64 / ramp as f64).min(1.0);
            let w = 2.0 * PI * freq * t;
            (amplitude * env * (0.7 * w.sin() + 0.2 * (2.0 * w).sin() + 0.1 * (3.0 * w).sin())) as f32
        })
        .collect()
}

/// Pure sine at constant amplitude.
pub fn sine(freq: f64, seconds: f64, amplitude: f64) -> AudioBuffer {
    let samples = (0..samples_for(seconds))
        .map(|i| (amplitude * (2.0 * PI * freq * i as f64 / RATE).sin()) as f32)
        .collect();
    AudioBuffer::new(samples, CANONICAL_RATE).expect("finite samples")
}

/// Back-to-back notes given as `(midi, seconds)`.
pub fn melody(notes: &[(u8, f64)], amplitude: f64) -> AudioBuffer {
    let samples = notes
        .iter()
        .flat_map(|&(m, secs)| tone(midi_to_freq(m as f64), secs, amplitude))
        .collect();
    AudioBuffer::new(samples, CANONICAL_RATE).expect("finite samples")
}

/// Noise band-passed to roughly 300-3400 Hz with a syllable-rate envelope.
pub fn speech_noise(rng: &mut impl Rng, seconds: f64, amplitude: f64) -> Vec<f32> {
    let n = samples_for(seconds);
    let hp = (-2.0 * PI * 300.0 / RATE).exp();
    let lp = 1.0 - (-2.0 * PI * 3400.0 / RATE).exp();
    let (mut prev_x, mut hp_y, mut lp_y) = (0.0, 0.0, 0.0);
    let syllable_hz = rng.gen_range(3.0..5.0);
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let x: f64 = rng.gen_range(-1.0..1.0);
            hp_y = hp * (hp_y + x - prev_x);
            prev_x = x;
            lp_y += lp * (hp_y - lp_y);
            let t = i as f64 / RATE;
            let env = 0.35 + 0.65 * (PI * syllable_hz * t).sin().abs();
            lp_y * env
        })
        .collect();
    let peak = raw.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let ramp = samples_for(0.01).max(1);
    raw.iter()
        .enumerate()
        .map(|(i, v)| {
            let edge = (i.min(n - 1 - i) as f64 / ramp as f64).min(1.0);
            (amplitude * edge * v / peak) as f32
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SyntheticPhrase {
    pub start: f64,
    pub end: f64,
    pub notes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct SyntheticLesson {
    pub stems: StemPair,
    /// Spoken segments, as ground-truth voice regions.
    pub voice_truth: Vec<Region>,
    /// Played phrases, as ground-truth instrument regions.
    pub instrument_truth: Vec<Region>,
    pub phrases: Vec<SyntheticPhrase>,
}

fn truth_region(track: Track, k: usize, start: f64, end: f64) -> Region {
    Region {
        id: format!("{}-{k}", track.as_str()),
        start: round_time(start),
        end: round_time(end),
        track,
        source: RegionSource::Auto,
        state: LearningState::ToLearn,
    }
}

/// Deterministic lesson of roughly `duration` seconds.
pub fn synth_lesson(seed: u64, duration: f64) -> SyntheticLesson {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = samples_for(duration);
    let mut voice = vec![0.0f32; total];
    let mut instrument = vec![0.0f32; total];
    let mut voice_truth = Vec::new();
    let mut instrument_truth = Vec::new();
    let mut phrases = Vec::new();

    let mut t = rng.gen_range(0.2..1.0);
    let mut speaking = rng.gen_bool(0.5);
    loop {
        let length = if speaking { rng.gen_range(3.0..7.0) } else { rng.gen_range(3.0..8.0) };
        if t + length > duration - 0.3 {
            break;
        }
        let offset = samples_for(t);
        if speaking {
            let amp = rng.gen_range(0.4..0.8);
            let burst = speech_noise(&mut rng, length, amp);
            voice[offset..offset + burst.len()].copy_from_slice(&burst);
            voice_truth.push(truth_region(Track::Voice, voice_truth.len(), t, t + length));
            t += length;
        } else {
            let amp = rng.gen_range(0.3..0.7);
            let mut notes = Vec::new();
            let mut cursor = offset;
            let mut played = 0.0;
            while played < length {
                let secs = rng.gen_range(0.25..0.6f64).min(length - played).max(0.1);
                let midi = SCALE[rng.gen_range(0..SCALE.len())];
                let wave = tone(midi_to_freq(midi as f64), secs, amp);
                let end = (cursor + wave.len()).min(total);
                instrument[cursor..end].copy_from_slice(&wave[..end - cursor]);
                cursor = end;
                played += secs;
                if notes.last() != Some(&midi) {
                    notes.push(midi);
                }
            }
            let end = cursor as f64 / RATE;
            instrument_truth.push(truth_region(Track::Instrument, instrument_truth.len(), t, end));
            phrases.push(SyntheticPhrase { start: t, end, notes });
            t = end;
        }
        t += rng.gen_range(0.3..1.2);
        speaking = !speaking;
    }

    for stem in [&mut voice, &mut instrument] {
        for s in stem.iter_mut() {
            *s += (NOISE_FLOOR * rng.gen_range(-1.0..1.0)) as f32;
        }
    }
    let stems = StemPair::new(
        AudioBuffer::new(voice, CANONICAL_RATE).expect("finite"),
        AudioBuffer::new(instrument, CANONICAL_RATE).expect("finite"),
    )
    .expect("stems have equal length");
    SyntheticLesson {
        stems,
        voice_truth,
        instrument_truth,
        phrases,
    }
}
