//! Silence-based segmentation of voice and instrument stems into regions.
//!
//! Each stem is peak-normalized, cut into 0.02 s windows, and the RMS energy
//! of every window is compared against a threshold picked from the stem's own
//! energy histogram. Runs of non-silent windows are joined across short gaps
//! and very short results are dropped.

use serde::{Deserialize, Serialize};

use crate::audio::{self, AudioBuffer, WindowSpec};
use crate::error::{Error, Result};
use crate::separation::StemPair;

/// Slack used when comparing window-aligned times against second-valued limits.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    Voice,
    Instrument,
}

impl Track {
    pub fn as_str(self) -> &'static str {
        match self {
            Track::Voice => "voice",
            Track::Instrument => "instrument",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionSource {
    Auto,
    User,
}

/// Learning stage of a region. Ordered: `ToLearn < Started < Aced`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningState {
    #[default]
    ToLearn,
    Started,
    Aced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: String,
    pub start: f64,
    pub end: f64,
    pub track: Track,
    pub source: RegionSource,
    pub state: LearningState,
}

impl Region {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub rms: Vec<f64>,
    pub window_seconds: f64,
}

impl EnergyProfile {
    pub fn max(&self) -> f64 {
        self.rms.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SilenceLabels {
    /// `true` for non-silent windows.
    pub labels: Vec<bool>,
    pub threshold: f64,
}

/// Tunables for the segmentation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    pub window_seconds: f64,
    pub histogram_bins: usize,
    pub smoothing_sigma: f64,
    pub gap_threshold: f64,
    pub min_duration: f64,
    /// Threshold used when the histogram method fails, as a fraction of the max RMS.
    pub fallback_fraction: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            window_seconds: audio::ANALYSIS_WINDOW_SECONDS,
            histogram_bins: 100,
            smoothing_sigma: 2.0,
            gap_threshold: 2.0,
            min_duration: 1.0,
            fallback_fraction: 0.05,
        }
    }
}

/// RMS energy of every window, each over its own sample count.
pub fn compute_rms(buf: &AudioBuffer, spec: &WindowSpec) -> EnergyProfile {
    let rms = audio::windows(buf, spec)
        .iter()
        .map(|w| {
            let sum: f64 = w.samples.iter().map(|&x| (x as f64) * (x as f64)).sum();
            (sum / w.samples.len() as f64).sqrt()
        })
        .collect();
    EnergyProfile {
        rms,
        window_seconds: spec.window_seconds,
    }
}

/// Discrete Gaussian smoothing with mirrored edges; kernel truncated at ±4σ.
fn gaussian_smooth(values: &[f64], sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 || values.is_empty() {
        return values.to_vec();
    }
    let radius = (4.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= total);

    let n = values.len() as isize;
    let reflect = |mut j: isize| -> usize {
        // a mirrored edge (d c b a | a b c d) folds any out-of-range index back in
        loop {
            if j < 0 {
                j = -j - 1;
            } else if j >= n {
                j = 2 * n - j - 1;
            } else {
                return j as usize;
            }
        }
    };
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * values[reflect(i + k as isize - radius)])
                .sum()
        })
        .collect()
}

/// Picks the silence threshold from the energy histogram.
///
/// The histogram of RMS values over `[0, max]` is smoothed and its discrete
/// second difference taken. Starting from the lowest-energy mode (the silence
/// floor), the smoothed curve is followed downhill to the valley that separates
/// it from the next mode; the threshold is the centre of the bin between those
/// two points where the second difference is most positive, i.e. the knee at
/// which the silence mode flattens out. Ties go to the lowest bin.
pub fn adaptive_threshold(profile: &EnergyProfile, bins: usize, smoothing_sigma: f64) -> Result<f64> {
    if bins < 8 {
        return Err(Error::InvalidArgument("histogram needs at least 8 bins".into()));
    }
    let Some(&first) = profile.rms.first() else {
        return Err(Error::DegenerateProfile);
    };
    if profile.rms.iter().all(|&v| v == first) {
        return Err(Error::DegenerateProfile);
    }
    let max = profile.max();
    let width = max / bins as f64;

    let mut counts = vec![0.0; bins];
    for &v in &profile.rms {
        let idx = ((v / width) as usize).min(bins - 1);
        counts[idx] += 1.0;
    }
    let smoothed = gaussian_smooth(&counts, smoothing_sigma);
    let eps = 1e-12 * smoothed.iter().copied().fold(0.0, f64::max);

    let mut peak = 0;
    while peak + 1 < bins && smoothed[peak + 1] >= smoothed[peak] - eps {
        peak += 1;
    }
    let mut valley = peak;
    while valley + 1 < bins && smoothed[valley + 1] <= smoothed[valley] + eps {
        valley += 1;
    }

    let lo = (peak + 1).max(1);
    let hi = valley.min(bins - 2);
    if lo > hi {
        return Err(Error::DegenerateProfile);
    }
    let second_diff = |i: usize| smoothed[i - 1] - 2.0 * smoothed[i] + smoothed[i + 1];
    let mut best = lo;
    for i in lo + 1..=hi {
        if second_diff(i) > second_diff(best) {
            best = i;
        }
    }
    Ok((best as f64 + 0.5) * width)
}

/// `labels[i] = rms[i] >= threshold`.
pub fn label_silence(profile: &EnergyProfile, threshold: f64) -> SilenceLabels {
    SilenceLabels {
        labels: profile.rms.iter().map(|&v| v >= threshold).collect(),
        threshold,
    }
}

/// Limits applied while turning window labels into regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupingParams {
    /// Runs separated by at most this many seconds are merged.
    pub gap_threshold: f64,
    /// Merged regions shorter than this are dropped.
    pub min_duration: f64,
}

impl Default for GroupingParams {
    fn default() -> Self {
        Self {
            gap_threshold: 2.0,
            min_duration: 1.0,
        }
    }
}

pub(crate) fn round_time(t: f64) -> f64 {
    (t * 1e6).round() / 1e6
}

/// Groups non-silent windows into auto regions on `track`.
///
/// Runs are merged while the silence between them is at most the gap
/// threshold; merging happens before the minimum-duration filter.
pub fn group_regions(
    labels: &SilenceLabels,
    window_seconds: f64,
    params: GroupingParams,
    track: Track,
) -> Vec<Region> {
    // maximal runs as [first, last+1) window indices
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    let flags = &labels.labels;
    while i < flags.len() {
        if flags[i] {
            let start = i;
            while i < flags.len() && flags[i] {
                i += 1;
            }
            runs.push((start, i));
        } else {
            i += 1;
        }
    }

    let mut merged: Vec<(usize, usize)> = Vec::new();
    for run in runs {
        match merged.last_mut() {
            Some(last) if (run.0 - last.1) as f64 * window_seconds <= params.gap_threshold + TIME_EPS => {
                last.1 = run.1;
            }
            _ => merged.push(run),
        }
    }

    merged
        .into_iter()
        .filter(|&(a, b)| (b - a) as f64 * window_seconds >= params.min_duration - TIME_EPS)
        .enumerate()
        .map(|(k, (a, b))| Region {
            id: format!("{}-{k}", track.as_str()),
            start: round_time(a as f64 * window_seconds),
            end: round_time(b as f64 * window_seconds),
            track,
            source: RegionSource::Auto,
            state: LearningState::ToLearn,
        })
        .collect()
}

/// Per-stem output of [`segment_lesson`].
#[derive(Debug, Clone, PartialEq)]
pub struct StemSegmentation {
    pub regions: Vec<Region>,
    pub profile: EnergyProfile,
    pub threshold: f64,
    pub threshold_fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LessonSegmentation {
    pub voice: StemSegmentation,
    pub instrument: StemSegmentation,
}

/// Threshold for a profile, falling back to a fraction of the peak RMS when
/// the histogram method has nothing to work with. Returns `(threshold, fallback)`.
pub fn threshold_with_fallback(profile: &EnergyProfile, config: &SegmentationConfig) -> (f64, bool) {
    match adaptive_threshold(profile, config.histogram_bins, config.smoothing_sigma) {
        Ok(t) => (t, false),
        Err(_) => {
            // An all-zero stem must stay silent under the >= comparison.
            let t = (config.fallback_fraction * profile.max()).max(f64::MIN_POSITIVE);
            (t, true)
        }
    }
}

pub fn segment_stem(
    buf: &AudioBuffer,
    track: Track,
    duration: f64,
    config: &SegmentationConfig,
) -> Result<StemSegmentation> {
    let spec = WindowSpec::new(config.window_seconds, buf.sample_rate())?;
    let normalized = audio::normalize_peak(buf);
    let profile = compute_rms(&normalized, &spec);
    let (threshold, threshold_fallback) = threshold_with_fallback(&profile, config);
    let labels = label_silence(&profile, threshold);
    let params = GroupingParams {
        gap_threshold: config.gap_threshold,
        min_duration: config.min_duration,
    };
    let mut regions = group_regions(&labels, spec.window_seconds, params, track);
    for r in &mut regions {
        r.end = r.end.min(round_time(duration));
    }
    Ok(StemSegmentation {
        regions,
        profile,
        threshold,
        threshold_fallback,
    })
}

/// Runs the full pipeline on both stems independently.
pub fn segment_lesson(stems: &StemPair, config: &SegmentationConfig) -> Result<LessonSegmentation> {
    let duration = stems.duration();
    Ok(LessonSegmentation {
        voice: segment_stem(stems.voice(), Track::Voice, duration, config)?,
        instrument: segment_stem(stems.instrument(), Track::Instrument, duration, config)?,
    })
}
