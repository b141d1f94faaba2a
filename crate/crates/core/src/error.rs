use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed audio: {0}")]
    Format(String),

    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("audio input contains no samples")]
    EmptyInput,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("stem durations differ by more than the allowed tolerance (voice {voice:.3}s, instrument {instrument:.3}s)")]
    StemMismatch { voice: f64, instrument: f64 },

    #[error("separator configuration error: {0}")]
    SeparatorConfig(String),

    #[error("separator exited with {status}: {diagnostics}")]
    SeparatorFailed { status: String, diagnostics: String },

    #[error("separator did not produce {0}")]
    SeparatorOutputMissing(PathBuf),

    #[error("energy profile is degenerate (all values identical or no silence mode)")]
    DegenerateProfile,

    #[error("region {0} is not on the instrument track")]
    WrongTrack(String),

    #[error("target note sequence is empty")]
    EmptyTarget,

    #[error("query note sequence is empty")]
    EmptyQuery,

    #[error("not found: {0}")]
    NotFound(String),

    #[error("corrupt session document: {0}")]
    CorruptSession(String),

    #[error("session revision conflict (stored {stored}, incoming {incoming})")]
    RevisionConflict { stored: u64, incoming: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
