//! Evaluation corpus layout.
//!
//! ```text
//! <corpus>/<entry>/mix.wav                     or voice.wav + instrument.wav
//! <corpus>/<entry>/truth.json                  {"instrument_regions": [{"start": s, "end": s}, ...]}
//! <corpus>/<entry>/predicted.json  (optional)  same shape; skips segmentation when present
//! ```

use std::path::{Path, PathBuf};

use lessonkit_core::audio::{encode_wav, WavEncoding};
use lessonkit_core::lesson::mixdown;
use lessonkit_core::synth::{self, SyntheticPhrase};
use lessonkit_core::{LearningState, Region, RegionSource, Track};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const TRUTH_FILE: &str = "truth.json";
pub const PREDICTED_FILE: &str = "predicted.json";
pub const MIX_FILE: &str = "mix.wav";
pub const VOICE_FILE: &str = "voice.wav";
pub const INSTRUMENT_FILE: &str = "instrument.wav";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseTruth {
    pub start: f64,
    pub end: f64,
    pub notes: Vec<u8>,
}

/// Labelled regions for one corpus entry. Only the instrument track is scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    pub instrument_regions: Vec<Span>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub voice_regions: Vec<Span>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phrases: Vec<PhraseTruth>,
}

impl TruthFile {
    pub fn instrument(&self) -> Vec<Region> {
        spans_to_regions(&self.instrument_regions, Track::Instrument)
    }
}

pub fn spans_to_regions(spans: &[Span], track: Track) -> Vec<Region> {
    spans
        .iter()
        .enumerate()
        .map(|(k, s)| Region {
            id: format!("{}-{k}", track.as_str()),
            start: s.start,
            end: s.end,
            track,
            source: RegionSource::Auto,
            state: LearningState::ToLearn,
        })
        .collect()
}

fn regions_to_spans(regions: &[Region]) -> Vec<Span> {
    regions.iter().map(|r| Span { start: r.start, end: r.end }).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntryAudio {
    Mix(PathBuf),
    Stems { voice: PathBuf, instrument: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryFiles {
    pub name: String,
    pub audio: Option<EntryAudio>,
    pub truth: TruthFile,
    pub predicted: Option<Vec<Region>>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Corpus(format!("{}: {e}", path.display())))
}

/// Entries in name order. Directories without `truth.json` are skipped.
pub fn read_corpus(dir: &Path) -> Result<Vec<EntryFiles>, CliError> {
    let listing = std::fs::read_dir(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut dirs: Vec<PathBuf> = listing
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(TRUTH_FILE).is_file())
        .collect();
    dirs.sort();

    let mut entries = Vec::with_capacity(dirs.len());
    for path in dirs {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let truth: TruthFile = read_json(&path.join(TRUTH_FILE))?;
        let predicted = match path.join(PREDICTED_FILE) {
            p if p.is_file() => Some(spans_to_regions(&read_json::<TruthFile>(&p)?.instrument_regions, Track::Instrument)),
            _ => None,
        };
        let audio = if path.join(MIX_FILE).is_file() {
            Some(EntryAudio::Mix(path.join(MIX_FILE)))
        } else if path.join(VOICE_FILE).is_file() && path.join(INSTRUMENT_FILE).is_file() {
            Some(EntryAudio::Stems {
                voice: path.join(VOICE_FILE),
                instrument: path.join(INSTRUMENT_FILE),
            })
        } else {
            None
        };
        if audio.is_none() && (predicted.is_none() || truth.duration.is_none()) {
            return Err(CliError::Corpus(format!(
                "{name}: needs {MIX_FILE} or {VOICE_FILE} + {INSTRUMENT_FILE}"
            )));
        }
        entries.push(EntryFiles {
            name,
            audio,
            truth,
            predicted,
        });
    }
    if entries.is_empty() {
        return Err(CliError::Corpus(format!("no entries with {TRUTH_FILE} in {}", dir.display())));
    }
    Ok(entries)
}

/// Writes `count` synthetic lessons of `duration` seconds, seeds
/// `seed..seed + count`, as stem pairs (or mixes) with truth files.
pub fn write_synthetic_corpus(dir: &Path, count: usize, duration: f64, seed: u64, as_mix: bool) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    let mut written = Vec::with_capacity(count);
    for k in 0..count {
        let lesson = synth::synth_lesson(seed + k as u64, duration);
        let entry = dir.join(format!("lesson-{k:02}"));
        std::fs::create_dir_all(&entry).map_err(io(&entry))?;
        if as_mix {
            let p = entry.join(MIX_FILE);
            std::fs::write(&p, encode_wav(&mixdown(&lesson.stems), WavEncoding::Pcm16)).map_err(io(&p))?;
        } else {
            let p = entry.join(VOICE_FILE);
            std::fs::write(&p, encode_wav(lesson.stems.voice(), WavEncoding::Pcm16)).map_err(io(&p))?;
            let p = entry.join(INSTRUMENT_FILE);
            std::fs::write(&p, encode_wav(lesson.stems.instrument(), WavEncoding::Pcm16)).map_err(io(&p))?;
        }
        let truth = TruthFile {
            duration: Some(lesson.stems.duration()),
            instrument_regions: regions_to_spans(&lesson.instrument_truth),
            voice_regions: regions_to_spans(&lesson.voice_truth),
            phrases: lesson
                .phrases
                .iter()
                .map(|SyntheticPhrase { start, end, notes }| PhraseTruth {
                    start: *start,
                    end: *end,
                    notes: notes.clone(),
                })
                .collect(),
        };
        let p = entry.join(TRUTH_FILE);
        let json = serde_json::to_vec_pretty(&truth).expect("truth serializes");
        std::fs::write(&p, json).map_err(io(&p))?;
        written.push(entry);
    }
    Ok(written)
}
