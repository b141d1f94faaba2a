//! MIDI note sequences and melody curves derived from pitch contours.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pitch::{filter_confident, PitchContour, PitchEstimator};
use crate::segmentation::{round_time, Region, Track};
use crate::separation::StemPair;

/// Highest note number produced by aggregation.
pub const MIDI_MAX: u8 = 128;

const NOTE_NAMES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

/// `12 * log2(f / 440) + 69`.
pub fn freq_to_midi(freq: f64) -> Result<f64> {
    if !(freq > 0.0) || !freq.is_finite() {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {freq}")));
    }
    Ok(12.0 * (freq / 440.0).log2() + 69.0)
}

pub fn midi_to_freq(midi: f64) -> f64 {
    440.0 * 2f64.powf((midi - 69.0) / 12.0)
}

/// Scientific pitch name, e.g. 69 -> "A4", 60 -> "C4".
pub fn note_name(midi: u8) -> String {
    let octave = midi as i32 / 12 - 1;
    format!("{}{}", NOTE_NAMES[midi as usize % 12], octave)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Note {
    pub midi: u8,
    pub onset: f64,
    pub duration: f64,
    pub mean_unrounded_midi: f64,
}

impl Note {
    pub fn end(&self) -> f64 {
        self.onset + self.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceSource {
    #[default]
    Reference,
    UserRecording,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoteSequence {
    pub notes: Vec<Note>,
    pub source: SequenceSource,
}

impl NoteSequence {
    pub fn midi(&self) -> Vec<u8> {
        self.notes.iter().map(|n| n.midi).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    /// Bare sequence of back-to-back notes, useful for queries built from a
    /// plain list of note numbers.
    pub fn from_midi(midi: &[u8], source: SequenceSource) -> Self {
        let notes = midi
            .iter()
            .enumerate()
            .map(|(i, &m)| Note {
                midi: m,
                onset: i as f64 * 0.1,
                duration: 0.1,
                mean_unrounded_midi: m as f64,
            })
            .collect();
        Self { notes, source }
    }
}

/// Unrounded pitch on the contour's frame grid, `None` where unvoiced.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MelodyCurve {
    pub times: Vec<f64>,
    pub unrounded_midi: Vec<Option<f64>>,
}

/// Rounded MIDI number for an unrounded value: half away from zero, clamped.
pub fn round_midi(unrounded: f64) -> u8 {
    unrounded.round().clamp(0.0, MIDI_MAX as f64) as u8
}

/// Aggregates consecutive voiced frames with the same rounded note number
/// into notes. Unvoiced frames break runs. Onsets are the start of the first
/// frame's hop interval.
pub fn contour_to_notes(contour: &PitchContour, source: SequenceSource) -> (NoteSequence, MelodyCurve) {
    let unrounded: Vec<Option<f64>> = contour
        .frames
        .iter()
        .map(|f| f.f0.and_then(|hz| freq_to_midi(hz).ok()))
        .collect();

    let mut notes = Vec::new();
    // (rounded, first frame, frame count, unrounded sum)
    let mut run: Option<(u8, usize, usize, f64)> = None;
    let flush = |run: Option<(u8, usize, usize, f64)>, notes: &mut Vec<Note>| {
        if let Some((midi, first, count, sum)) = run {
            notes.push(Note {
                midi,
                onset: round_time(contour.frame_start(first)),
                duration: round_time(count as f64 * contour.frame_seconds),
                mean_unrounded_midi: sum / count as f64,
            });
        }
    };
    for (i, value) in unrounded.iter().enumerate() {
        match (*value, run) {
            (Some(u), Some((midi, first, count, sum))) if round_midi(u) == midi => {
                run = Some((midi, first, count + 1, sum + u));
            }
            (Some(u), _) => {
                flush(run.take(), &mut notes);
                run = Some((round_midi(u), i, 1, u));
            }
            (None, _) => flush(run.take(), &mut notes),
        }
    }
    flush(run, &mut notes);

    let curve = MelodyCurve {
        times: contour.frames.iter().map(|f| f.time).collect(),
        unrounded_midi: unrounded,
    };
    (NoteSequence { notes, source }, curve)
}

/// Full note-detection pipeline over one buffer: estimate, filter, aggregate.
pub fn detect_notes(
    buf: &crate::audio::AudioBuffer,
    estimator: &dyn PitchEstimator,
    min_confidence: f64,
    source: SequenceSource,
) -> Result<(NoteSequence, MelodyCurve)> {
    let contour = estimator.estimate(buf)?;
    let filtered = filter_confident(&contour, min_confidence);
    Ok(contour_to_notes(&filtered, source))
}

/// Notes of one instrument region, with region-relative onsets.
pub fn extract_region_notes(
    stems: &StemPair,
    region: &Region,
    estimator: &dyn PitchEstimator,
    min_confidence: f64,
) -> Result<(NoteSequence, MelodyCurve)> {
    if region.track != Track::Instrument {
        return Err(Error::WrongTrack(region.id.clone()));
    }
    if region.start < 0.0 || region.end <= region.start || region.start >= stems.duration() {
        return Err(Error::InvalidArgument(format!(
            "region {} [{}, {}] is outside the lesson",
            region.id, region.start, region.end
        )));
    }
    let slice = stems.instrument().slice_seconds(region.start, region.end);
    detect_notes(&slice, estimator, min_confidence, SequenceSource::Reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pitch::PitchFrame;

    fn contour_from_midi(values: &[Option<f64>]) -> PitchContour {
        PitchContour {
            frames: values
                .iter()
                .enumerate()
                .map(|(i, m)| PitchFrame {
                    time: (i as f64 + 0.5) * 0.1,
                    f0: m.map(midi_to_freq),
                    confidence: if m.is_some() { 0.95 } else { 0.0 },
                })
                .collect(),
            frame_seconds: 0.1,
        }
    }

    #[test]
    fn reference_frequencies() {
        assert_eq!(freq_to_midi(440.0).unwrap(), 69.0);
        assert_eq!(freq_to_midi(880.0).unwrap(), 81.0);
        assert!((freq_to_midi(261.626).unwrap() - 60.0).abs() < 1e-3);
        assert!(freq_to_midi(0.0).is_err());
        assert!(freq_to_midi(-3.0).is_err());
    }

    #[test]
    fn names() {
        assert_eq!(note_name(69), "A4");
        assert_eq!(note_name(71), "B4");
        assert_eq!(note_name(60), "C4");
        assert_eq!(note_name(61), "C#4");
        assert_eq!(note_name(0), "C-1");
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round_midi(69.5), 70);
        assert_eq!(round_midi(69.49), 69);
        assert_eq!(round_midi(-3.0), 0);
        assert_eq!(round_midi(140.0), 128);
    }

    #[test]
    fn near_equal_frames_aggregate() {
        let c = contour_from_midi(&[Some(69.1), Some(69.2), Some(69.0)]);
        let (seq, curve) = contour_to_notes(&c, SequenceSource::Reference);
        assert_eq!(seq.notes.len(), 1);
        assert_eq!(seq.notes[0].midi, 69);
        assert!((seq.notes[0].duration - 0.3).abs() < 1e-9);
        assert!((seq.notes[0].mean_unrounded_midi - 69.1).abs() < 1e-9);
        assert_eq!(curve.times.len(), 3);
        assert!((curve.unrounded_midi[1].unwrap() - 69.2).abs() < 1e-9);
    }

    #[test]
    fn unvoiced_frame_breaks_run() {
        let c = contour_from_midi(&[Some(69.0), Some(69.0), None, Some(69.0)]);
        let (seq, _) = contour_to_notes(&c, SequenceSource::Reference);
        assert_eq!(seq.midi(), vec![69, 69]);
        assert_eq!(seq.notes[1].onset, 0.3);
    }

    #[test]
    fn all_unvoiced() {
        let c = contour_from_midi(&[None, None]);
        let (seq, curve) = contour_to_notes(&c, SequenceSource::UserRecording);
        assert!(seq.is_empty());
        assert_eq!(curve.unrounded_midi, vec![None, None]);
    }

    #[test]
    fn voice_region_rejected() {
        let buf = crate::audio::AudioBuffer::silence(22_050, 22_050).unwrap();
        let stems = StemPair::new(buf.clone(), buf).unwrap();
        let region = Region {
            id: "voice-0".into(),
            start: 0.0,
            end: 1.0,
            track: Track::Voice,
            source: crate::segmentation::RegionSource::Auto,
            state: Default::default(),
        };
        let est = crate::pitch::YinEstimator::default();
        assert!(matches!(extract_region_notes(&stems, &region, &est, 0.7), Err(Error::WrongTrack(_))));
    }
}
