//! Per-viseme MFCC templates and conversion of audio into smoothed mouth
//! weight timelines.
//!
//! Classification is nearest-template: each voiced frame gets a weight
//! `exp(-d / tau)` per vowel, where `d` is the Euclidean distance to that
//! vowel's mean MFCC and `tau` is the mean of the five distances. Frames below
//! the RMS gate are pure silence. An exponential moving average then removes
//! single-frame flicker.

mod calibration;
mod types;

pub use calibration::{
    calibrate, profile_from_features, CalibrationSet, DEFAULT_SILENCE_RMS_THRESHOLD,
    MIN_VOICED_FRAMES,
};
pub use types::{
    PhonemeProfile, UnknownViseme, Viseme, VisemeFrame, VisemeTimeline, VisemeWeights,
};

use std::sync::Arc;

use crate::audio::{
    pre_emphasize, shared_extractor, AudioClip, FrameSpec, MfccExtractor, MfccVector, WindowKind,
    CANONICAL_RATE_HZ,
};

pub const DEFAULT_TIME_CONSTANT_SECONDS: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum VisemeError {
    #[error("no calibration clip or profile for viseme {0}")]
    MissingViseme(Viseme),
    #[error("viseme {viseme} has {voiced} voiced frames, at least {MIN_VOICED_FRAMES} required")]
    InsufficientVoicedFrames { viseme: Viseme, voiced: usize },
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
    #[error("calibration JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Raw (unsmoothed) weights for one frame.
pub fn classify_frame(mfcc: &MfccVector, cal: &CalibrationSet) -> VisemeFrame {
    let t = mfcc.t_start_seconds;
    if mfcc.frame_rms < cal.silence_rms_threshold() {
        return VisemeFrame::new(t, VisemeWeights::one_hot(Viseme::Sil));
    }
    let distances: Vec<(Viseme, f64)> = cal
        .profiles()
        .iter()
        .map(|p| (p.viseme, mfcc.distance(&p.mean_mfcc)))
        .collect();
    let tau = distances.iter().map(|(_, d)| d).sum::<f64>() / distances.len() as f64;
    let mut raw = [0.0; 6];
    for (v, d) in distances {
        // tau == 0 means every distance is 0: all templates tie
        raw[v.index()] = if tau > 0.0 { (-d / tau).exp() } else { 1.0 };
    }
    VisemeFrame::new(t, VisemeWeights(raw).normalized())
}

/// Streaming per-viseme exponential moving average.
#[derive(Debug, Clone)]
pub struct EmaSmoother {
    beta: f64,
    state: Option<[f64; 6]>,
}

impl EmaSmoother {
    pub fn new(hop_seconds: f64, time_constant_seconds: f64) -> Self {
        let beta = if time_constant_seconds > 0.0 {
            1.0 - (-hop_seconds / time_constant_seconds).exp()
        } else {
            1.0
        };
        Self { beta, state: None }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn push(&mut self, frame: &VisemeFrame) -> VisemeFrame {
        let next = match self.state {
            None => frame.weights.0,
            Some(prev) => {
                let mut s = [0.0; 6];
                for i in 0..6 {
                    s[i] = self.beta * frame.weights.0[i] + (1.0 - self.beta) * prev[i];
                }
                s
            }
        };
        self.state = Some(next);
        VisemeFrame::new(frame.t_seconds, VisemeWeights(next).normalized())
    }
}

/// Smooths a raw timeline. The first frame passes through unchanged.
pub fn smooth(raw: &VisemeTimeline, time_constant_seconds: f64) -> VisemeTimeline {
    let mut smoother = EmaSmoother::new(raw.hop_seconds, time_constant_seconds);
    VisemeTimeline {
        audio_duration_seconds: raw.audio_duration_seconds,
        hop_seconds: raw.hop_seconds,
        frames: raw.frames.iter().map(|f| smoother.push(f)).collect(),
    }
}

/// Lazily computes smoothed viseme frames for a clip, one per hop.
///
/// Iterating to the end yields exactly the frames of [`generate_timeline`].
pub struct LipSyncStream {
    cal: Arc<CalibrationSet>,
    extractor: Arc<MfccExtractor>,
    signal: Vec<f64>,
    window: Vec<f64>,
    spec: FrameSpec,
    next_frame: usize,
    total_frames: usize,
    smoother: EmaSmoother,
    duration_seconds: f64,
}

impl LipSyncStream {
    pub fn new(clip: &AudioClip, cal: Arc<CalibrationSet>, extractor: Arc<MfccExtractor>) -> Self {
        Self::with_time_constant(clip, cal, extractor, DEFAULT_TIME_CONSTANT_SECONDS)
    }

    pub fn with_time_constant(
        clip: &AudioClip,
        cal: Arc<CalibrationSet>,
        extractor: Arc<MfccExtractor>,
        time_constant_seconds: f64,
    ) -> Self {
        let clip = clip.to_canonical_rate();
        let spec = FrameSpec::default();
        let signal = pre_emphasize(clip.samples());
        Self {
            cal,
            extractor,
            window: crate::audio::window_coefficients(
                WindowKind::Hamming,
                spec.frame_length_samples,
            ),
            total_frames: crate::audio::frame_count(signal.len(), spec.hop_samples),
            signal,
            spec,
            next_frame: 0,
            smoother: EmaSmoother::new(hop_seconds(&spec), time_constant_seconds),
            duration_seconds: clip.duration_seconds(),
        }
    }

    pub fn hop_seconds(&self) -> f64 {
        hop_seconds(&self.spec)
    }

    pub fn audio_duration_seconds(&self) -> f64 {
        self.duration_seconds
    }

    pub fn total_frames(&self) -> usize {
        self.total_frames
    }

    /// Start time of the next frame to be produced, if any remain.
    pub fn peek_t(&self) -> Option<f64> {
        (self.next_frame < self.total_frames).then(|| self.frame_time(self.next_frame))
    }

    fn frame_time(&self, k: usize) -> f64 {
        (k * self.spec.hop_samples) as f64 / CANONICAL_RATE_HZ as f64
    }
}

fn hop_seconds(spec: &FrameSpec) -> f64 {
    spec.hop_samples as f64 / CANONICAL_RATE_HZ as f64
}

impl Iterator for LipSyncStream {
    type Item = VisemeFrame;

    fn next(&mut self) -> Option<VisemeFrame> {
        if self.next_frame >= self.total_frames {
            return None;
        }
        let start = self.next_frame * self.spec.hop_samples;
        let frame: Vec<f64> = self
            .window
            .iter()
            .enumerate()
            .map(|(i, w)| self.signal.get(start + i).copied().unwrap_or(0.0) * w)
            .collect();
        let t = self.frame_time(self.next_frame);
        self.next_frame += 1;
        let mfcc = self.extractor.compute(&frame, t);
        Some(self.smoother.push(&classify_frame(&mfcc, &self.cal)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.total_frames - self.next_frame;
        (left, Some(left))
    }
}

/// Full pipeline: resample, frame, MFCC, classify, smooth.
pub fn generate_timeline(clip: &AudioClip, cal: &CalibrationSet) -> VisemeTimeline {
    let stream = LipSyncStream::new(clip, Arc::new(cal.clone()), shared_extractor());
    let hop = stream.hop_seconds();
    let duration = stream.audio_duration_seconds();
    VisemeTimeline {
        audio_duration_seconds: duration,
        hop_seconds: hop,
        frames: stream.collect(),
    }
}
