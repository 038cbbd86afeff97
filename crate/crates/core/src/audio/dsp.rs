use std::f64::consts::PI;

use super::AudioClip;

pub const PRE_EMPHASIS: f64 = 0.97;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Hamming,
    Hann,
    Rectangular,
}

/// Frame length, hop and taper. `0 < hop <= frame_length`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSpec {
    pub frame_length_samples: usize,
    pub hop_samples: usize,
    pub window: WindowKind,
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self {
            frame_length_samples: 400,
            hop_samples: 160,
            window: WindowKind::Hamming,
        }
    }
}

impl FrameSpec {
    pub fn new(frame_length_samples: usize, hop_samples: usize, window: WindowKind) -> Self {
        assert!(
            hop_samples > 0 && hop_samples <= frame_length_samples,
            "hop must be in 1..=frame_length"
        );
        Self {
            frame_length_samples,
            hop_samples,
            window,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedFrame {
    /// Index of the first sample covered.
    pub start: usize,
    pub samples: Vec<f64>,
}

pub fn window_coefficients(kind: WindowKind, len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| {
            let phase = 2.0 * PI * n as f64 / denom;
            match kind {
                WindowKind::Hamming => 0.54 - 0.46 * phase.cos(),
                WindowKind::Hann => 0.5 - 0.5 * phase.cos(),
                WindowKind::Rectangular => 1.0,
            }
        })
        .collect()
}

/// Linear-interpolation resampler. Output length is `round(len * target / source)`.
pub fn resample(clip: &AudioClip, target_rate_hz: u32) -> AudioClip {
    assert!(target_rate_hz > 0, "target rate must be positive");
    let source_rate = clip.sample_rate_hz();
    if source_rate == target_rate_hz {
        return clip.clone();
    }
    let input = clip.samples();
    let out_len =
        ((input.len() as f64) * target_rate_hz as f64 / source_rate as f64).round() as usize;
    let mut out = Vec::with_capacity(out_len);
    let last = input.len().saturating_sub(1);
    for i in 0..out_len {
        // exact integer numerator keeps grid-aligned outputs bit-equal to inputs
        let num = i as u64 * source_rate as u64;
        let base = (num / target_rate_hz as u64) as usize;
        let frac = (num % target_rate_hz as u64) as f64 / target_rate_hz as f64;
        let a = input[base.min(last)] as f64;
        let b = input[(base + 1).min(last)] as f64;
        out.push(if frac == 0.0 {
            input[base.min(last)]
        } else {
            (a + (b - a) * frac) as f32
        });
    }
    AudioClip::new(out, target_rate_hz)
}

/// First-order high-pass `y[n] = x[n] - 0.97 x[n-1]`, with `y[0] = x[0]`.
pub fn pre_emphasize(samples: &[f32]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut prev = 0.0f64;
    for (i, &s) in samples.iter().enumerate() {
        let x = s as f64;
        out.push(if i == 0 { x } else { x - PRE_EMPHASIS * prev });
        prev = x;
    }
    out
}

/// `floor((len - 1) / hop) + 1` for non-empty input, 0 otherwise.
pub fn frame_count(len: usize, hop: usize) -> usize {
    if len == 0 {
        0
    } else {
        (len - 1) / hop + 1
    }
}

fn frame_signal(signal: &[f64], spec: &FrameSpec) -> Vec<WindowedFrame> {
    let window = window_coefficients(spec.window, spec.frame_length_samples);
    (0..frame_count(signal.len(), spec.hop_samples))
        .map(|k| {
            let start = k * spec.hop_samples;
            let samples = window
                .iter()
                .enumerate()
                .map(|(i, w)| signal.get(start + i).copied().unwrap_or(0.0) * w)
                .collect();
            WindowedFrame { start, samples }
        })
        .collect()
}

/// Splits a clip into overlapping windowed frames, zero-padding the tail.
///
/// No pre-emphasis is applied here; see [`analysis_frames`].
pub fn frames(clip: &AudioClip, spec: &FrameSpec) -> Vec<WindowedFrame> {
    let signal: Vec<f64> = clip.samples().iter().map(|&s| s as f64).collect();
    frame_signal(&signal, spec)
}

/// The feature path: pre-emphasis over the whole clip, then framing and windowing.
pub fn analysis_frames(clip: &AudioClip, spec: &FrameSpec) -> Vec<WindowedFrame> {
    frame_signal(&pre_emphasize(clip.samples()), spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sine(freq: f64, rate: u32, n: usize) -> Vec<f32> {
        (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / rate as f64).sin() as f32)
            .collect()
    }

    #[test]
    fn resample_identity_is_bit_equal() {
        let clip = AudioClip::new(sine(440.0, 16_000, 1000), 16_000);
        assert_eq!(resample(&clip, 16_000), clip);
    }

    #[test]
    fn upsample_2x_keeps_originals_at_even_indices() {
        let input: Vec<f32> = vec![0.1, -0.2, 0.3, 0.9, -0.5, 0.0, 0.25, -1.0];
        let out = resample(&AudioClip::new(input.clone(), 8000), 16_000);
        assert_eq!(out.len(), 16);
        assert_eq!(out.sample_rate_hz(), 16_000);
        for (k, &v) in input.iter().enumerate() {
            assert_eq!(out.samples()[2 * k], v);
        }
        assert!((out.samples()[1] - (-0.05)).abs() < 1e-7);
    }

    #[test]
    fn downsample_44k1_sine_tracks_direct_synthesis() {
        let src = AudioClip::new(sine(440.0, 44_100, 44_100), 44_100);
        let out = resample(&src, 16_000);
        let direct = sine(440.0, 16_000, 16_000);
        assert_eq!(out.len(), direct.len());
        let dot: f64 = out
            .samples()
            .iter()
            .zip(&direct)
            .map(|(a, b)| *a as f64 * *b as f64)
            .sum();
        let na: f64 = out
            .samples()
            .iter()
            .map(|a| (*a as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        let nb: f64 = direct
            .iter()
            .map(|b| (*b as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(dot / (na * nb) >= 0.999, "correlation {}", dot / (na * nb));
    }

    #[test]
    fn output_length_rounds() {
        let clip = AudioClip::new(vec![0.0; 3], 3);
        assert_eq!(resample(&clip, 2).len(), 2);
        assert_eq!(resample(&AudioClip::new(vec![], 8000), 16_000).len(), 0);
    }

    #[test]
    fn empty_clip_has_no_frames() {
        assert!(frames(&AudioClip::new(vec![], 16_000), &FrameSpec::default()).is_empty());
    }

    #[test]
    fn four_hundred_samples_make_three_frames() {
        let clip = AudioClip::new(vec![0.5; 400], 16_000);
        let fr = frames(&clip, &FrameSpec::default());
        assert_eq!(
            fr.iter().map(|f| f.start).collect::<Vec<_>>(),
            vec![0, 160, 320]
        );
        // second frame: 240 real samples then padding
        assert_eq!(
            fr[1].samples[239],
            0.5 * window_coefficients(WindowKind::Hamming, 400)[239]
        );
        assert!(fr[1].samples[240..].iter().all(|&s| s == 0.0));
        assert!(fr[2].samples[80..].iter().all(|&s| s == 0.0));
    }

    #[test]
    fn all_ones_frame_is_the_hamming_window() {
        let clip = AudioClip::new(vec![1.0; 400], 16_000);
        let fr = &frames(&clip, &FrameSpec::default())[0];
        let center = 1.0 * (0.54 - 0.46 * (2.0 * PI * 200.0 / 399.0).cos());
        assert_eq!(fr.samples[200], center);
        for n in 0..400 {
            let expected = 0.54 - 0.46 * (2.0 * PI * n as f64 / 399.0).cos();
            assert!((fr.samples[n] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn pre_emphasis_first_order() {
        let y = pre_emphasize(&[1.0, 1.0, 0.0]);
        assert_eq!(y[0], 1.0);
        assert!((y[1] - 0.03).abs() < 1e-12);
        assert!((y[2] + 0.97).abs() < 1e-12);
    }

    #[test]
    #[should_panic]
    fn hop_longer_than_frame_rejected() {
        FrameSpec::new(100, 101, WindowKind::Hann);
    }

    proptest! {
        #[test]
        fn frame_starts_form_arithmetic_progression(
            len in 0usize..5000,
            frame_len in 1usize..600,
            hop_frac in 0.01f64..=1.0,
        ) {
            let hop = ((frame_len as f64 * hop_frac).ceil() as usize).clamp(1, frame_len);
            let spec = FrameSpec::new(frame_len, hop, WindowKind::Rectangular);
            let clip = AudioClip::new(vec![0.1; len], 16_000);
            let fr = frames(&clip, &spec);
            prop_assert_eq!(fr.len(), if len == 0 { 0 } else { (len - 1) / hop + 1 });
            for (k, f) in fr.iter().enumerate() {
                prop_assert_eq!(f.start, k * hop);
                prop_assert_eq!(f.samples.len(), frame_len);
            }
        }
    }
}
