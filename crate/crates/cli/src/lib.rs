//! Batch entry points behind the `lessonkit` binary: preprocess a lesson to
//! disk, score one recording against a reference, and evaluate segmentation
//! over a labelled corpus.

pub mod corpus;

use std::path::{Path, PathBuf};

use lessonkit_core::eval::{self, CorpusEntry, EvalReport};
use lessonkit_core::lesson::{self, LessonDir, Stage};
use lessonkit_core::notes::SequenceSource;
use lessonkit_core::scoring::{self, ScoreReport};
use lessonkit_core::segmentation;
use lessonkit_core::separation::{self, SeparatorConfig, StemPair};
use lessonkit_core::{audio, AnalysisConfig};
use serde::Serialize;
use thiserror::Error;

use crate::corpus::EntryAudio;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lessonkit_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("corpus: {0}")]
    Corpus(String),

    #[error(transparent)]
    Config(#[from] lessonkit_server::config::ConfigError),

    #[error("{0}")]
    Invalid(String),
}

/// Where a lesson's audio comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum LessonInput {
    Mix(PathBuf),
    Stems { voice: PathBuf, instrument: PathBuf },
}

/// Loads stems directly, or separates a mix with `separator` (passing the
/// mix through as the instrument stem when there is none).
pub fn load_input(input: &LessonInput, separator: Option<&SeparatorConfig>) -> Result<StemPair, CliError> {
    let stems = match input {
        LessonInput::Stems { voice, instrument } => separation::load_stems(voice, instrument)?,
        LessonInput::Mix(path) => match separator {
            Some(sep) => separation::run_external_separator(path, sep)?,
            None => {
                log::info!("no separator configured; using the mix as the instrument stem");
                separation::passthrough_stems(&audio::load_canonical(path)?)?
            }
        },
    };
    Ok(stems)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreprocessSummary {
    pub lesson_id: String,
    pub out: PathBuf,
    pub duration: f64,
    pub voice_regions: usize,
    pub instrument_regions: usize,
}

fn lesson_id_for(out: &Path) -> Result<String, CliError> {
    let name = out
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default()
        .to_string();
    let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if !ok {
        return Err(CliError::Invalid(format!(
            "output directory name {name:?} must be a lesson id (letters, digits, '-' and '_')"
        )));
    }
    Ok(name)
}

/// Runs the full pipeline and writes the lesson into `out`, whose final path
/// component becomes the lesson id.
pub fn preprocess(
    input: &LessonInput,
    out: &Path,
    media: Option<&Path>,
    analysis: &AnalysisConfig,
    separator: Option<&SeparatorConfig>,
) -> Result<PreprocessSummary, CliError> {
    let lesson_id = lesson_id_for(out)?;
    let stems = load_input(input, separator)?;
    let manifest = lesson::preprocess(&lesson_id, &stems, analysis, |stage| match stage {
        Stage::Segmenting => log::info!("segmenting"),
        Stage::ExtractingNotes { done, total } => log::debug!("extracting notes {done}/{total}"),
        Stage::Assembling => log::info!("writing {}", out.display()),
    })?;
    let media = match media {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("bin").to_ascii_lowercase();
            Some((ext, bytes))
        }
        None => None,
    };
    LessonDir::new(out).write(&manifest, &stems, media.as_ref().map(|(e, b)| (e.as_str(), &b[..])))?;
    Ok(PreprocessSummary {
        lesson_id,
        out: out.to_path_buf(),
        duration: manifest.duration,
        voice_regions: manifest.voice_regions.len(),
        instrument_regions: manifest.instrument_regions.len(),
    })
}

/// Note detection on both files, then the LCS score of the recording against
/// the reference.
pub fn score_files(reference: &Path, recording: &Path, analysis: &AnalysisConfig) -> Result<ScoreReport, CliError> {
    let (target, _, _) = lesson::analyze_notes(&audio::load_canonical(reference)?, analysis, SequenceSource::Reference)?;
    let (played, _, _) =
        lesson::analyze_notes(&audio::load_canonical(recording)?, analysis, SequenceSource::UserRecording)?;
    Ok(scoring::score_performance(&target, &played)?)
}

/// Segments every corpus entry (unless it ships predictions) and evaluates
/// the instrument regions against truth with both baselines.
pub fn evaluate(
    corpus_dir: &Path,
    seed: u64,
    analysis: &AnalysisConfig,
    separator: Option<&SeparatorConfig>,
) -> Result<EvalReport, CliError> {
    let mut entries = Vec::new();
    for files in corpus::read_corpus(corpus_dir)? {
        let truth = files.truth.instrument();
        let (predicted, duration) = match (files.predicted, files.truth.duration, &files.audio) {
            (Some(pred), Some(duration), _) => (pred, duration),
            (pred, _, Some(audio)) => {
                let input = match audio {
                    EntryAudio::Mix(p) => LessonInput::Mix(p.clone()),
                    EntryAudio::Stems { voice, instrument } => LessonInput::Stems {
                        voice: voice.clone(),
                        instrument: instrument.clone(),
                    },
                };
                let stems = load_input(&input, separator)?;
                let predicted = match pred {
                    Some(p) => p,
                    None => segmentation::segment_lesson(&stems, &analysis.segmentation)?.instrument.regions,
                };
                (predicted, stems.duration())
            }
            _ => return Err(CliError::Corpus(format!("{}: no audio and no labelled duration", files.name))),
        };
        log::info!("{}: {} predicted, {} labelled regions", files.name, predicted.len(), truth.len());
        entries.push(CorpusEntry {
            name: files.name,
            predicted,
            truth,
            duration,
        });
    }
    Ok(eval::evaluate_corpus(&entries, seed)?)
}

/// Writes `report.json` and `report.txt` into `dir`.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<(), CliError> {
    let io = |path: PathBuf| move |source| CliError::Io { path, source };
    std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
    let json = serde_json::to_vec_pretty(report).expect("report serializes");
    let p = dir.join("report.json");
    std::fs::write(&p, json).map_err(io(p.clone()))?;
    let p = dir.join("report.txt");
    std::fs::write(&p, report.to_table()).map_err(io(p.clone()))?;
    Ok(())
}
