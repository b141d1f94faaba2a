//! Decoding, normalization and windowing of raw audio.
//!
//! Everything downstream works on mono [`AudioBuffer`]s at [`CANONICAL_RATE`],
//! where one 0.02 s analysis window is exactly 441 samples.

use std::io::Cursor;

use crate::error::{Error, Result};

/// Analysis sample rate. 441 samples per 0.02 s window.
pub const CANONICAL_RATE: u32 = 22_050;

/// Duration of one energy analysis window in seconds.
pub const ANALYSIS_WINDOW_SECONDS: f64 = 0.02;

/// Immutable mono sample buffer with amplitudes in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f32>,
    sample_rate: u32,
    channel_count: u16,
}

impl AudioBuffer {
    /// Builds a mono buffer. Samples are clamped into [-1, 1]; non-finite
    /// samples are rejected.
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        Self::with_channels(samples, sample_rate, 1)
    }

    pub(crate) fn with_channels(
        mut samples: Vec<f32>,
        sample_rate: u32,
        channel_count: u16,
    ) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("samples must be finite".into()));
        }
        for s in &mut samples {
            *s = s.clamp(-1.0, 1.0);
        }
        Ok(Self {
            samples,
            sample_rate,
            channel_count: channel_count.max(1),
        })
    }

    /// All-zero buffer of the given length.
    pub fn silence(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Channel count of the source before mixdown.
    pub fn channel_count(&self) -> u16 {
        self.channel_count
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }

    /// Copies the samples covering `[start, end)` seconds, clipped to the buffer.
    pub fn slice_seconds(&self, start: f64, end: f64) -> AudioBuffer {
        let rate = self.sample_rate as f64;
        let lo = ((start.max(0.0) * rate).round() as usize).min(self.len());
        let hi = ((end.max(0.0) * rate).round() as usize).clamp(lo, self.len());
        AudioBuffer {
            samples: self.samples[lo..hi].to_vec(),
            sample_rate: self.sample_rate,
            channel_count: 1,
        }
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }
}

/// Window length in both seconds and samples for a given rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub window_seconds: f64,
    pub window_samples: usize,
}

impl WindowSpec {
    pub fn new(window_seconds: f64, sample_rate: u32) -> Result<Self> {
        if !(window_seconds > 0.0) {
            return Err(Error::InvalidArgument("window length must be positive".into()));
        }
        let window_samples = (window_seconds * sample_rate as f64).round() as usize;
        if window_samples == 0 {
            return Err(Error::InvalidArgument(format!(
                "window of {window_seconds}s is shorter than one sample at {sample_rate} Hz"
            )));
        }
        Ok(Self {
            window_seconds,
            window_samples,
        })
    }

    /// 0.02 s at the canonical rate, i.e. 441 samples.
    pub fn canonical() -> Self {
        Self {
            window_seconds: ANALYSIS_WINDOW_SECONDS,
            window_samples: 441,
        }
    }
}

/// A contiguous, non-overlapping slice of a buffer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<'a> {
    pub index: usize,
    pub samples: &'a [f32],
    /// Set on a trailing window shorter than the window length.
    pub partial: bool,
}

impl Window<'_> {
    pub fn start_seconds(&self, spec: &WindowSpec) -> f64 {
        self.index as f64 * spec.window_seconds
    }
}

/// Splits the buffer into consecutive windows; a short tail is kept and flagged.
pub fn windows<'a>(buf: &'a AudioBuffer, spec: &WindowSpec) -> Vec<Window<'a>> {
    let n = spec.window_samples.max(1);
    buf.samples
        .chunks(n)
        .enumerate()
        .map(|(index, samples)| Window {
            index,
            samples,
            partial: samples.len() < n,
        })
        .collect()
}

/// Scales so the absolute peak becomes 1.0. Silent input is returned as is.
pub fn normalize_peak(buf: &AudioBuffer) -> AudioBuffer {
    let peak = buf.peak();
    if peak <= 0.0 || peak == 1.0 {
        return buf.clone();
    }
    let gain = 1.0 / peak;
    AudioBuffer {
        samples: buf.samples.iter().map(|s| (s * gain).clamp(-1.0, 1.0)).collect(),
        sample_rate: buf.sample_rate,
        channel_count: buf.channel_count,
    }
}

/// Linear-interpolation resampling.
pub fn resample(buf: &AudioBuffer, target_rate: u32) -> Result<AudioBuffer> {
    if target_rate == 0 {
        return Err(Error::InvalidArgument("target rate must be positive".into()));
    }
    if target_rate == buf.sample_rate || buf.is_empty() {
        return Ok(AudioBuffer {
            samples: buf.samples.clone(),
            sample_rate: target_rate,
            channel_count: buf.channel_count,
        });
    }
    let src = &buf.samples;
    let ratio = buf.sample_rate as f64 / target_rate as f64;
    let out_len = (src.len() as f64 * target_rate as f64 / buf.sample_rate as f64).round() as usize;
    let last = src.len() - 1;
    let samples = (0..out_len)
        .map(|i| {
            let pos = i as f64 * ratio;
            let idx = pos.floor() as usize;
            if idx >= last {
                return src[last];
            }
            let frac = pos - idx as f64;
            (src[idx] as f64 * (1.0 - frac) + src[idx + 1] as f64 * frac) as f32
        })
        .collect();
    Ok(AudioBuffer {
        samples,
        sample_rate: target_rate,
        channel_count: buf.channel_count,
    })
}

/// Decodes a RIFF/WAVE byte stream (PCM 8/16/24/32-bit or 32-bit float, one
/// or two channels) into a mono buffer at its native rate.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    let reader = hound::WavReader::new(Cursor::new(bytes)).map_err(map_hound)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 || channels > 2 {
        return Err(Error::UnsupportedFormat(format!("{channels} channels")));
    }

    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (hound::SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| (v as f64 / scale) as f32))
                .collect::<std::result::Result<_, _>>()
                .map_err(map_hound)?
        }
        (format, bits) => {
            return Err(Error::UnsupportedFormat(format!("{format:?} with {bits} bits")))
        }
    };

    if interleaved.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mono = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().map(|&s| s as f64).sum::<f64>() as f32 / channels as f32)
            .collect()
    };
    if mono.is_empty() {
        return Err(Error::EmptyInput);
    }
    AudioBuffer::with_channels(mono, spec.sample_rate, spec.channels)
}

fn map_hound(err: hound::Error) -> Error {
    match err {
        hound::Error::Unsupported => Error::UnsupportedFormat("non-PCM or unsupported WAV encoding".into()),
        hound::Error::FormatError(msg) => Error::Format(msg.to_string()),
        hound::Error::IoError(e) => Error::Format(format!("truncated or unreadable WAV: {e}")),
        other => Error::Format(other.to_string()),
    }
}

/// Sample encoding used by [`encode_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

/// Encodes a mono WAV file.
pub fn encode_wav(buf: &AudioBuffer, encoding: WavEncoding) -> Vec<u8> {
    let (bits, format) = match encoding {
        WavEncoding::Pcm16 => (16, hound::SampleFormat::Int),
        WavEncoding::Float32 => (32, hound::SampleFormat::Float),
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: buf.sample_rate,
        bits_per_sample: bits,
        sample_format: format,
    };
    let mut cursor = Cursor::new(Vec::with_capacity(44 + buf.len() * bits as usize / 8));
    {
        // Writing into memory cannot fail short of allocation failure.
        let mut writer = hound::WavWriter::new(&mut cursor, spec).expect("in-memory wav writer");
        for &s in &buf.samples {
            match encoding {
                WavEncoding::Pcm16 => {
                    let q = (s as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    writer.write_sample(q).expect("in-memory write");
                }
                WavEncoding::Float32 => writer.write_sample(s).expect("in-memory write"),
            }
        }
        writer.finalize().expect("in-memory finalize");
    }
    cursor.into_inner()
}

/// Reads a WAV file from disk and resamples it to the canonical rate.
pub fn load_canonical(path: &std::path::Path) -> Result<AudioBuffer> {
    let bytes = std::fs::read(path)?;
    resample(&decode_wav(&bytes)?, CANONICAL_RATE)
}
