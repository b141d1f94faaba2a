//! Frame-wise fundamental frequency estimation.
//!
//! [`PitchEstimator`] is the extension point; [`YinEstimator`] is the bundled
//! implementation (cumulative-mean-normalized difference function with an
//! absolute threshold and parabolic refinement).

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchFrame {
    /// Frame centre in seconds.
    pub time: f64,
    /// `None` for unvoiced frames.
    pub f0: Option<f64>,
    pub confidence: f64,
}

impl PitchFrame {
    pub fn is_voiced(&self) -> bool {
        self.f0.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchContour {
    pub frames: Vec<PitchFrame>,
    /// Hop between frame centres.
    pub frame_seconds: f64,
}

impl PitchContour {
    pub fn voiced_count(&self) -> usize {
        self.frames.iter().filter(|f| f.is_voiced()).count()
    }

    /// Start of the hop interval a frame represents.
    pub fn frame_start(&self, index: usize) -> f64 {
        index as f64 * self.frame_seconds
    }
}

pub trait PitchEstimator: Send + Sync {
    fn estimate(&self, buf: &AudioBuffer) -> Result<PitchContour>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct YinConfig {
    pub f_min: f64,
    pub f_max: f64,
    pub frame_seconds: f64,
    pub window_samples: usize,
    pub threshold: f64,
    /// Frames whose window RMS falls below this are unvoiced outright.
    pub silence_rms: f64,
}

impl Default for YinConfig {
    fn default() -> Self {
        Self {
            f_min: 60.0,
            f_max: 1400.0,
            frame_seconds: 0.1,
            window_samples: 2048,
            threshold: 0.15,
            silence_rms: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct YinEstimator {
    config: YinConfig,
}

impl YinEstimator {
    pub fn new(config: YinConfig) -> Result<Self> {
        if !(config.f_min > 0.0) || config.f_min >= config.f_max {
            return Err(Error::InvalidArgument(format!(
                "pitch range must satisfy 0 < f_min < f_max (got {} .. {})",
                config.f_min, config.f_max
            )));
        }
        if config.window_samples < 4 || !(config.frame_seconds > 0.0) {
            return Err(Error::InvalidArgument("invalid pitch frame geometry".into()));
        }
        Ok(Self { config })
    }

    pub fn config(&self) -> &YinConfig {
        &self.config
    }

    fn analyze_window(&self, window: &[f64], sample_rate: f64) -> (Option<f64>, f64) {
        let cfg = &self.config;
        let energy = (window.iter().map(|x| x * x).sum::<f64>() / window.len() as f64).sqrt();
        if energy < cfg.silence_rms {
            return (None, 0.0);
        }

        let integration = window.len() / 2;
        let tau_min = ((sample_rate / cfg.f_max).floor() as usize).max(2);
        let tau_max = ((sample_rate / cfg.f_min).ceil() as usize).min(window.len() - integration - 1);
        if tau_min + 1 >= tau_max {
            return (None, 0.0);
        }

        // difference function d(tau) for tau in 0..=tau_max+1
        let mut diff = vec![0.0; tau_max + 2];
        for (tau, d) in diff.iter_mut().enumerate().skip(1) {
            *d = (0..integration)
                .map(|j| {
                    let delta = window[j] - window[j + tau];
                    delta * delta
                })
                .sum();
        }
        // cumulative mean normalization
        let mut cmnd = vec![1.0; diff.len()];
        let mut running = 0.0;
        for tau in 1..diff.len() {
            running += diff[tau];
            cmnd[tau] = if running > 0.0 { diff[tau] * tau as f64 / running } else { 1.0 };
        }

        let mut chosen = None;
        let mut tau = tau_min;
        while tau <= tau_max {
            if cmnd[tau] < cfg.threshold {
                while tau < tau_max && cmnd[tau + 1] < cmnd[tau] {
                    tau += 1;
                }
                chosen = Some(tau);
                break;
            }
            tau += 1;
        }
        let tau = chosen.unwrap_or_else(|| {
            (tau_min..=tau_max)
                .min_by(|&a, &b| cmnd[a].total_cmp(&cmnd[b]))
                .unwrap_or(tau_min)
        });

        let refined = {
            let (a, b, c) = (cmnd[tau - 1], cmnd[tau], cmnd[tau + 1]);
            let denom = a - 2.0 * b + c;
            if denom.abs() > f64::EPSILON {
                let offset = 0.5 * (a - c) / denom;
                tau as f64 + offset.clamp(-1.0, 1.0)
            } else {
                tau as f64
            }
        };
        let f0 = (sample_rate / refined).clamp(cfg.f_min, cfg.f_max);
        let confidence = (1.0 - cmnd[tau]).clamp(0.0, 1.0);
        (Some(f0), confidence)
    }
}

impl Default for YinEstimator {
    fn default() -> Self {
        Self {
            config: YinConfig::default(),
        }
    }
}

impl PitchEstimator for YinEstimator {
    fn estimate(&self, buf: &AudioBuffer) -> Result<PitchContour> {
        let cfg = &self.config;
        let rate = buf.sample_rate() as f64;
        if cfg.f_max >= rate / 2.0 {
            return Err(Error::InvalidArgument(format!(
                "f_max {} must be below the Nyquist frequency {}",
                cfg.f_max,
                rate / 2.0
            )));
        }
        let hop = cfg.frame_seconds * rate;
        let samples = buf.samples();
        let frame_count = (samples.len() as f64 / hop - 1e-9).ceil().max(0.0) as usize;
        let half = cfg.window_samples as isize / 2;

        let mut window = vec![0.0f64; cfg.window_samples];
        let frames = (0..frame_count)
            .map(|k| {
                let time = (k as f64 + 0.5) * cfg.frame_seconds;
                let centre = (time * rate).round() as isize;
                for (i, w) in window.iter_mut().enumerate() {
                    let idx = centre - half + i as isize;
                    *w = if idx >= 0 && (idx as usize) < samples.len() {
                        samples[idx as usize] as f64
                    } else {
                        0.0
                    };
                }
                let (f0, confidence) = self.analyze_window(&window, rate);
                PitchFrame { time, f0, confidence }
            })
            .collect();
        Ok(PitchContour {
            frames,
            frame_seconds: cfg.frame_seconds,
        })
    }
}

/// Unvoices every frame whose confidence is strictly below `min_confidence`.
pub fn filter_confident(contour: &PitchContour, min_confidence: f64) -> PitchContour {
    PitchContour {
        frames: contour
            .frames
            .iter()
            .map(|f| {
                if f.confidence < min_confidence {
                    PitchFrame { f0: None, ..*f }
                } else {
                    *f
                }
            })
            .collect(),
        frame_seconds: contour.frame_seconds,
    }
}
