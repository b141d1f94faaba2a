//! Server configuration: a TOML file plus `LESSONKIT_*` environment overrides.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! storage_root = "data"
//! static_dir = "webui/dist"          # optional
//! max_upload_bytes = 536870912
//! max_recording_seconds = 60.0
//!
//! [separator]                        # optional; without it a mix is used as the instrument stem
//! command_template = "demucs --two-stems vocals -o {outdir} {input}"
//! voice_file = "vocals.wav"
//! instrument_file = "accompaniment.wav"
//!
//! [analysis]                         # every DSP parameter, all optional
//! min_confidence = 0.7
//! query_threshold = 80.0
//! [analysis.segmentation]
//! gap_threshold = 2.0
//! [analysis.pitch]
//! threshold = 0.15
//! ```

use std::path::{Path, PathBuf};

use lessonkit_core::separation::SeparatorConfig;
use lessonkit_core::AnalysisConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ENV_LISTEN: &str = "LESSONKIT_LISTEN";
pub const ENV_STORAGE_ROOT: &str = "LESSONKIT_STORAGE_ROOT";
pub const ENV_STATIC_DIR: &str = "LESSONKIT_STATIC_DIR";
pub const ENV_MAX_UPLOAD_BYTES: &str = "LESSONKIT_MAX_UPLOAD_BYTES";
pub const ENV_MAX_RECORDING_SECONDS: &str = "LESSONKIT_MAX_RECORDING_SECONDS";
pub const ENV_SEPARATOR_CMD: &str = "LESSONKIT_SEPARATOR_CMD";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("invalid config file: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("invalid value {value:?} for {var}")]
    Env { var: &'static str, value: String },

    #[error(transparent)]
    Invalid(#[from] lessonkit_core::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub listen: String,
    /// Holds `lessons/<id>/` and `sessions/<id>/<user>.json`.
    pub storage_root: PathBuf,
    /// Web client bundle served for every non-API path.
    pub static_dir: Option<PathBuf>,
    pub max_upload_bytes: usize,
    /// Hard cap on the length of a scored recording.
    pub max_recording_seconds: f64,
    pub separator: Option<SeparatorConfig>,
    pub analysis: AnalysisConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            storage_root: PathBuf::from("data"),
            static_dir: None,
            max_upload_bytes: 512 * 1024 * 1024,
            max_recording_seconds: 60.0,
            separator: None,
            analysis: AnalysisConfig::default(),
        }
    }
}

impl ServerConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: ServerConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads `path` if given (defaults otherwise), then applies the process
    /// environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        config.apply_env(std::env::vars())?;
        Ok(config)
    }

    /// Applies `LESSONKIT_*` overrides from `vars`.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<(), ConfigError> {
        for (key, value) in vars {
            match key.as_str() {
                ENV_LISTEN => self.listen = value,
                ENV_STORAGE_ROOT => self.storage_root = value.into(),
                ENV_STATIC_DIR => self.static_dir = (!value.is_empty()).then(|| value.into()),
                ENV_MAX_UPLOAD_BYTES => {
                    self.max_upload_bytes = value.parse().map_err(|_| ConfigError::Env {
                        var: ENV_MAX_UPLOAD_BYTES,
                        value: value.clone(),
                    })?
                }
                ENV_MAX_RECORDING_SECONDS => {
                    self.max_recording_seconds = value
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite() && *v > 0.0)
                        .ok_or(ConfigError::Env {
                            var: ENV_MAX_RECORDING_SECONDS,
                            value: value.clone(),
                        })?
                }
                ENV_SEPARATOR_CMD => {
                    self.separator = if value.is_empty() {
                        None
                    } else {
                        let names = self.separator.take().unwrap_or_default();
                        Some(SeparatorConfig {
                            command_template: value,
                            ..names
                        })
                    }
                }
                _ => {}
            }
        }
        self.validate()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if let Some(sep) = &self.separator {
            sep.validate()?;
        }
        Ok(())
    }

    pub fn lessons_dir(&self) -> PathBuf {
        self.storage_root.join("lessons")
    }

    pub fn sessions_dir(&self) -> PathBuf {
        self.storage_root.join("sessions")
    }
}
