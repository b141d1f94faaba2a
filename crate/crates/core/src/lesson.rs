//! Lesson manifests: everything the practice client needs about one lesson,
//! and the preprocessing pipeline that produces them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::{encode_wav, AudioBuffer, WavEncoding, ANALYSIS_WINDOW_SECONDS};
use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::notes::{self, MelodyCurve, Note, NoteSequence, SequenceSource};
use crate::pitch::{filter_confident, PitchContour, PitchEstimator, YinEstimator};
use crate::segmentation::{self, Region, Track};
use crate::separation::StemPair;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const STEMS_DIR: &str = "stems";
pub const VOICE_STEM_FILE: &str = "voice.wav";
pub const INSTRUMENT_STEM_FILE: &str = "instrument.wav";

fn round_to(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (value * scale).round() / scale
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireNote {
    pub midi: u8,
    pub onset: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WireCurve {
    pub times: Vec<f64>,
    pub midi: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WireContour {
    pub times: Vec<f64>,
    pub f0: Vec<Option<f64>>,
    pub confidence: Vec<f64>,
}

/// Serialized analysis of one instrument region.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionNotes {
    pub notes: Vec<WireNote>,
    pub curve: WireCurve,
    pub contour: WireContour,
}

impl RegionNotes {
    pub fn new(seq: &NoteSequence, curve: &MelodyCurve, contour: &PitchContour) -> Self {
        Self {
            notes: seq
                .notes
                .iter()
                .map(|n| WireNote {
                    midi: n.midi,
                    onset: round_to(n.onset, 3),
                    duration: round_to(n.duration, 3),
                })
                .collect(),
            curve: WireCurve {
                times: curve.times.iter().map(|&t| round_to(t, 4)).collect(),
                midi: curve.unrounded_midi.iter().map(|m| m.map(|v| round_to(v, 4))).collect(),
            },
            contour: WireContour {
                times: contour.frames.iter().map(|f| round_to(f.time, 4)).collect(),
                f0: contour.frames.iter().map(|f| f.f0.map(|v| round_to(v, 4))).collect(),
                confidence: contour.frames.iter().map(|f| round_to(f.confidence, 4)).collect(),
            },
        }
    }

    pub fn sequence(&self) -> NoteSequence {
        NoteSequence {
            notes: self
                .notes
                .iter()
                .map(|n| Note {
                    midi: n.midi,
                    onset: n.onset,
                    duration: n.duration,
                    mean_unrounded_midi: n.midi as f64,
                })
                .collect(),
            source: SequenceSource::Reference,
        }
    }

    pub fn melody_curve(&self) -> MelodyCurve {
        MelodyCurve {
            times: self.curve.times.clone(),
            unrounded_midi: self.curve.midi.clone(),
        }
    }
}

/// Min/max envelope per analysis window.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WaveformPeaks {
    pub window_seconds: f64,
    pub voice: Vec<[f32; 2]>,
    pub instrument: Vec<[f32; 2]>,
}

pub fn envelope(buf: &AudioBuffer, window_seconds: f64) -> Vec<[f32; 2]> {
    let n = ((window_seconds * buf.sample_rate() as f64).round() as usize).max(1);
    let round4 = |v: f32| ((v as f64 * 1e4).round() / 1e4) as f32;
    buf.samples()
        .chunks(n)
        .map(|w| {
            let (lo, hi) = w.iter().fold((0.0f32, 0.0f32), |(lo, hi), &s| (lo.min(s), hi.max(s)));
            [round4(lo), round4(hi)]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdInfo {
    pub threshold: f64,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LessonManifest {
    pub lesson_id: String,
    pub duration: f64,
    pub media_url: String,
    pub voice_regions: Vec<Region>,
    pub instrument_regions: Vec<Region>,
    /// Keyed by instrument region id.
    pub region_notes: BTreeMap<String, RegionNotes>,
    pub waveform_peaks: WaveformPeaks,
    pub thresholds: BTreeMap<Track, ThresholdInfo>,
    pub preprocessing_config: AnalysisConfig,
}

impl LessonManifest {
    pub fn regions(&self) -> impl Iterator<Item = &Region> {
        self.voice_regions.iter().chain(&self.instrument_regions)
    }

    pub fn region(&self, id: &str) -> Option<&Region> {
        self.regions().find(|r| r.id == id)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

pub fn media_url(lesson_id: &str) -> String {
    format!("/api/lessons/{lesson_id}/media")
}

/// Pitch contour, filtered notes and curve for one buffer.
pub fn analyze_notes(
    buf: &AudioBuffer,
    config: &AnalysisConfig,
    source: SequenceSource,
) -> Result<(NoteSequence, MelodyCurve, PitchContour)> {
    let estimator = YinEstimator::new(config.pitch.clone())?;
    let contour = estimator.estimate(buf)?;
    let filtered = filter_confident(&contour, config.min_confidence);
    let (seq, curve) = notes::contour_to_notes(&filtered, source);
    Ok((seq, curve, contour))
}

/// Note analysis of an instrument region.
pub fn analyze_region(stems: &StemPair, region: &Region, config: &AnalysisConfig) -> Result<RegionNotes> {
    if region.track != Track::Instrument {
        return Err(Error::WrongTrack(region.id.clone()));
    }
    let slice = stems.instrument().slice_seconds(region.start, region.end);
    let (seq, curve, contour) = analyze_notes(&slice, config, SequenceSource::Reference)?;
    Ok(RegionNotes::new(&seq, &curve, &contour))
}

/// Stage reached by [`preprocess`], for progress reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Segmenting,
    ExtractingNotes { done: usize, total: usize },
    Assembling,
}

/// Segments both stems, extracts notes for every instrument region and
/// assembles the manifest.
pub fn preprocess(
    lesson_id: &str,
    stems: &StemPair,
    config: &AnalysisConfig,
    mut progress: impl FnMut(Stage),
) -> Result<LessonManifest> {
    progress(Stage::Segmenting);
    let seg = segmentation::segment_lesson(stems, &config.segmentation)?;

    let total = seg.instrument.regions.len();
    let mut region_notes = BTreeMap::new();
    for (done, region) in seg.instrument.regions.iter().enumerate() {
        progress(Stage::ExtractingNotes { done, total });
        region_notes.insert(region.id.clone(), analyze_region(stems, region, config)?);
    }

    progress(Stage::Assembling);
    let window = ANALYSIS_WINDOW_SECONDS;
    let thresholds = BTreeMap::from([
        (Track::Voice, ThresholdInfo { threshold: seg.voice.threshold, fallback: seg.voice.threshold_fallback }),
        (
            Track::Instrument,
            ThresholdInfo { threshold: seg.instrument.threshold, fallback: seg.instrument.threshold_fallback },
        ),
    ]);
    Ok(LessonManifest {
        lesson_id: lesson_id.into(),
        duration: segmentation::round_time(stems.duration()),
        media_url: media_url(lesson_id),
        voice_regions: seg.voice.regions,
        instrument_regions: seg.instrument.regions,
        region_notes,
        waveform_peaks: WaveformPeaks {
            window_seconds: window,
            voice: envelope(stems.voice(), window),
            instrument: envelope(stems.instrument(), window),
        },
        thresholds,
        preprocessing_config: config.clone(),
    })
}

/// On-disk layout of one lesson: `manifest.json`, `stems/*.wav`, `media.*`.
#[derive(Debug, Clone)]
pub struct LessonDir {
    root: PathBuf,
}

impl LessonDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST_FILE)
    }

    pub fn stem_path(&self, track: Track) -> PathBuf {
        let name = match track {
            Track::Voice => VOICE_STEM_FILE,
            Track::Instrument => INSTRUMENT_STEM_FILE,
        };
        self.root.join(STEMS_DIR).join(name)
    }

    /// First `media.*` file in the lesson directory.
    pub fn media_path(&self) -> Option<PathBuf> {
        let entries = std::fs::read_dir(&self.root).ok()?;
        let mut found: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.file_stem().is_some_and(|s| s == "media") && p.is_file())
            .collect();
        found.sort();
        found.into_iter().next()
    }

    /// Writes stems, media and manifest. Stems are stored as 32-bit float so
    /// reloading them reproduces the analysed samples exactly.
    pub fn write(&self, manifest: &LessonManifest, stems: &StemPair, media: Option<(&str, &[u8])>) -> Result<()> {
        std::fs::create_dir_all(self.root.join(STEMS_DIR))?;
        std::fs::write(self.stem_path(Track::Voice), encode_wav(stems.voice(), WavEncoding::Float32))?;
        std::fs::write(self.stem_path(Track::Instrument), encode_wav(stems.instrument(), WavEncoding::Float32))?;
        match media {
            Some((ext, bytes)) => {
                let ext = ext.trim_start_matches('.');
                let ext = if ext.is_empty() || !ext.chars().all(|c| c.is_ascii_alphanumeric()) { "bin" } else { ext };
                std::fs::write(self.root.join(format!("media.{ext}")), bytes)?;
            }
            None => {
                let mix = mixdown(stems);
                std::fs::write(self.root.join("media.wav"), encode_wav(&mix, WavEncoding::Pcm16))?;
            }
        }
        std::fs::write(self.manifest_path(), manifest.to_json())?;
        Ok(())
    }

    pub fn read_manifest(&self) -> Result<LessonManifest> {
        let path = self.manifest_path();
        match std::fs::read(&path) {
            Ok(bytes) => LessonManifest::from_json(&bytes),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(Error::NotFound(format!("lesson manifest {}", path.display())))
            }
            Err(e) => Err(e.into()),
        }
    }

    pub fn read_stems(&self) -> Result<StemPair> {
        crate::separation::load_stems(&self.stem_path(Track::Voice), &self.stem_path(Track::Instrument))
    }
}

/// Sum of both stems, clamped, for playback when no media file was supplied.
pub fn mixdown(stems: &StemPair) -> AudioBuffer {
    let (v, i) = (stems.voice().samples(), stems.instrument().samples());
    let n = v.len().max(i.len());
    let samples = (0..n)
        .map(|k| v.get(k).copied().unwrap_or(0.0) + i.get(k).copied().unwrap_or(0.0))
        .collect();
    AudioBuffer::new(samples, stems.instrument().sample_rate()).expect("stems are finite")
}
