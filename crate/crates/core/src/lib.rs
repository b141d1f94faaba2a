//! Instrument-lesson analysis: turns a lesson's audio into practice regions
//! with reference melodies, scores recorded attempts against them and tracks
//! learning progress.
//!
//! Pipeline: [`audio`] decoding → [`separation`] into voice/instrument stems →
//! [`segmentation`] into regions → [`pitch`] tracking and [`notes`] extraction
//! → [`lesson`] manifest. Recordings are scored with [`scoring`]; progress lives
//! in [`session`]; [`eval`] measures segmentation quality against labels.

pub mod audio;
pub mod config;
pub mod error;
pub mod eval;
pub mod lesson;
pub mod notes;
pub mod pitch;
pub mod scoring;
pub mod segmentation;
pub mod separation;
pub mod session;
pub mod synth;

pub use audio::{AudioBuffer, WindowSpec, CANONICAL_RATE};
pub use config::AnalysisConfig;
pub use error::{Error, Result};
pub use lesson::{LessonDir, LessonManifest};
pub use notes::{MelodyCurve, Note, NoteSequence};
pub use pitch::{PitchContour, PitchEstimator, YinEstimator};
pub use scoring::ScoreReport;
pub use segmentation::{LearningState, Region, RegionSource, Track};
pub use separation::StemPair;
pub use session::{SessionEvent, SessionState, SessionStore};
