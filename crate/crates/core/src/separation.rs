//! Voice/instrument stems for a lesson.
//!
//! Stems come from pre-separated files, from an external separation tool
//! driven through a command template, or (for instrument-only material) from
//! the mix itself with a silent voice track.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::audio::{self, AudioBuffer, ANALYSIS_WINDOW_SECONDS, CANONICAL_RATE};
use crate::error::{Error, Result};

/// Largest accepted difference between the two stem durations.
pub const STEM_DURATION_TOLERANCE: f64 = ANALYSIS_WINDOW_SECONDS;

#[derive(Debug, Clone, PartialEq)]
pub struct StemPair {
    voice: AudioBuffer,
    instrument: AudioBuffer,
}

impl StemPair {
    /// Both stems must already be at the canonical rate.
    pub fn new(voice: AudioBuffer, instrument: AudioBuffer) -> Result<Self> {
        for (name, stem) in [("voice", &voice), ("instrument", &instrument)] {
            if stem.sample_rate() != CANONICAL_RATE {
                return Err(Error::InvalidArgument(format!(
                    "{name} stem is at {} Hz, expected {CANONICAL_RATE} Hz",
                    stem.sample_rate()
                )));
            }
        }
        // Compare in samples so that a one-window difference is accepted exactly.
        let diff = voice.len().abs_diff(instrument.len());
        let allowed = (STEM_DURATION_TOLERANCE * CANONICAL_RATE as f64).round() as usize;
        if diff > allowed {
            return Err(Error::StemMismatch {
                voice: voice.duration(),
                instrument: instrument.duration(),
            });
        }
        Ok(Self { voice, instrument })
    }

    pub fn voice(&self) -> &AudioBuffer {
        &self.voice
    }

    pub fn instrument(&self) -> &AudioBuffer {
        &self.instrument
    }

    /// Lesson duration: the longer of the two stems.
    pub fn duration(&self) -> f64 {
        self.voice.duration().max(self.instrument.duration())
    }
}

pub fn load_stems(voice_path: &Path, instrument_path: &Path) -> Result<StemPair> {
    let voice = audio::load_canonical(voice_path)?;
    let instrument = audio::load_canonical(instrument_path)?;
    StemPair::new(voice, instrument)
}

/// Voice is silence of the mix's length, instrument is the mix unchanged.
pub fn passthrough_stems(mix: &AudioBuffer) -> Result<StemPair> {
    let instrument = audio::resample(mix, CANONICAL_RATE)?;
    let voice = AudioBuffer::silence(instrument.len(), CANONICAL_RATE)?;
    StemPair::new(voice, instrument)
}

/// How to invoke an external separation tool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeparatorConfig {
    /// Shell command with `{input}` and `{outdir}` placeholders.
    pub command_template: String,
    pub voice_file: String,
    pub instrument_file: String,
}

impl Default for SeparatorConfig {
    fn default() -> Self {
        Self {
            command_template: String::new(),
            voice_file: "vocals.wav".into(),
            instrument_file: "accompaniment.wav".into(),
        }
    }
}

impl SeparatorConfig {
    pub fn from_template(template: impl Into<String>) -> Self {
        Self {
            command_template: template.into(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for placeholder in ["{input}", "{outdir}"] {
            if !self.command_template.contains(placeholder) {
                return Err(Error::SeparatorConfig(format!(
                    "command template is missing the {placeholder} placeholder"
                )));
            }
        }
        Ok(())
    }

    fn render(&self, input: &Path, outdir: &Path) -> String {
        self.command_template
            .replace("{input}", &shell_quote(input))
            .replace("{outdir}", &shell_quote(outdir))
    }
}

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

/// Runs the separator on `mix_path` inside a scratch directory and loads the
/// two stems it writes.
pub fn run_external_separator(mix_path: &Path, config: &SeparatorConfig) -> Result<StemPair> {
    config.validate()?;
    let scratch = tempfile::tempdir()?;
    let outdir = scratch.path().join("stems");
    std::fs::create_dir_all(&outdir)?;
    let command = config.render(mix_path, &outdir);
    log::info!("running separator: {command}");

    let output = Command::new("sh").arg("-c").arg(&command).output()?;
    if !output.status.success() {
        let mut diagnostics = String::from_utf8_lossy(&output.stderr).trim().to_string();
        if diagnostics.is_empty() {
            diagnostics = String::from_utf8_lossy(&output.stdout).trim().to_string();
        }
        return Err(Error::SeparatorFailed {
            status: output.status.to_string(),
            diagnostics,
        });
    }

    let voice: PathBuf = outdir.join(&config.voice_file);
    let instrument: PathBuf = outdir.join(&config.instrument_file);
    for path in [&voice, &instrument] {
        if !path.is_file() {
            return Err(Error::SeparatorOutputMissing(path.clone()));
        }
    }
    load_stems(&voice, &instrument)
}
