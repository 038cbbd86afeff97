//! PCM audio handling and per-frame MFCC features.
//!
//! Everything in here is a pure function of its inputs. The analysis chain is
//! fixed at 16 kHz mono, 25 ms frames every 10 ms, Hamming window, 0.97
//! pre-emphasis, 512-point transform, 26 mel filters and 12 cepstral
//! coefficients with c0 dropped.

mod dsp;
mod mfcc;
mod wav;

pub use dsp::{
    analysis_frames, frame_count, frames, pre_emphasize, resample, window_coefficients, FrameSpec,
    WindowKind, WindowedFrame, PRE_EMPHASIS,
};
pub use mfcc::{
    compute_mfcc, hz_to_mel, mel_to_hz, power_spectrum, shared_extractor, MfccExtractor,
    MfccVector, FFT_SIZE, LOG_FLOOR, MEL_FILTERS, NUM_COEFFS,
};
pub use wav::{decode_wav, encode_wav, read_wav_file, write_wav_file, WavError};

/// Internal analysis rate.
pub const CANONICAL_RATE_HZ: u32 = 16_000;

/// Decoded mono PCM.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f32>,
    sample_rate_hz: u32,
}

impl AudioClip {
    /// Builds a clip, clamping every sample into [-1, 1].
    ///
    /// Panics if `sample_rate_hz` is zero.
    pub fn new(mut samples: Vec<f32>, sample_rate_hz: u32) -> Self {
        assert!(sample_rate_hz > 0, "sample rate must be positive");
        for s in samples.iter_mut() {
            *s = if s.is_nan() { 0.0 } else { s.clamp(-1.0, 1.0) };
        }
        Self {
            samples,
            sample_rate_hz,
        }
    }

    pub fn silence(duration_seconds: f64, sample_rate_hz: u32) -> Self {
        let n = (duration_seconds * sample_rate_hz as f64).round() as usize;
        Self::new(vec![0.0; n], sample_rate_hz)
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Always 1; stereo input is averaged on decode.
    pub fn channel_count(&self) -> u16 {
        1
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Multiplies every sample by `gain`, clamping to full scale.
    pub fn scaled(&self, gain: f32) -> Self {
        Self::new(
            self.samples.iter().map(|s| s * gain).collect(),
            self.sample_rate_hz,
        )
    }

    /// Returns the clip at the canonical analysis rate, borrowing when it already is.
    pub fn to_canonical_rate(&self) -> std::borrow::Cow<'_, AudioClip> {
        if self.sample_rate_hz == CANONICAL_RATE_HZ {
            std::borrow::Cow::Borrowed(self)
        } else {
            std::borrow::Cow::Owned(resample(self, CANONICAL_RATE_HZ))
        }
    }

    /// 16-bit quantization used on the wire and in WAV output.
    pub fn to_pcm16(&self) -> Vec<i16> {
        self.samples.iter().map(|&s| quantize_i16(s)).collect()
    }
}

pub(crate) fn quantize_i16(sample: f32) -> i16 {
    (sample as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}
