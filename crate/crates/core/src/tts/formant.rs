use std::f64::consts::PI;

use crate::audio::{AudioClip, CANONICAL_RATE_HZ};
use crate::viseme::{calibrate, CalibrationSet, Viseme, DEFAULT_SILENCE_RMS_THRESHOLD};

pub const FORMANT_AMPLITUDE: f64 = 0.4;
pub const CROSSFADE_SECONDS: f64 = 0.01;
pub const VOWEL_SECONDS: f64 = 0.25;
pub const NON_VOWEL_SECONDS: f64 = 0.06;
/// Length of each vowel recording used by [`formant_calibration`].
pub const CALIBRATION_SECONDS: f64 = 0.5;

/// Test-tone formant pair (Hz) for a vowel; `None` for silence.
pub fn formant_pair(v: Viseme) -> Option<(f64, f64)> {
    match v {
        Viseme::A => Some((800.0, 1200.0)),
        Viseme::I => Some((300.0, 2300.0)),
        Viseme::U => Some((350.0, 800.0)),
        Viseme::E => Some((500.0, 1900.0)),
        Viseme::O => Some((450.0, 900.0)),
        Viseme::Sil => None,
    }
}

/// Each vowel letter becomes 250 ms of that vowel; every other character 60 ms of silence.
pub fn text_to_vowel_sequence(text: &str) -> Vec<(Viseme, f64)> {
    text.to_lowercase()
        .chars()
        .map(|c| match Viseme::from_vowel_letter(c) {
            Some(v) => (v, VOWEL_SECONDS),
            None => (Viseme::Sil, NON_VOWEL_SECONDS),
        })
        .collect()
}

/// Renders a vowel sequence at 16 kHz.
///
/// Each segment is two equal-amplitude sines starting at phase 0 at the
/// segment start. Adjacent segments cross-fade over 10 ms centred on the
/// boundary with complementary raised-cosine gains; the clip edges are not faded.
pub fn synthesize_vowels(sequence: &[(Viseme, f64)]) -> AudioClip {
    let rate = CANONICAL_RATE_HZ as f64;
    let mut bounds = Vec::with_capacity(sequence.len() + 1);
    let mut elapsed = 0.0;
    bounds.push(0usize);
    for &(_, d) in sequence {
        assert!(d > 0.0, "segment durations must be positive");
        elapsed += d;
        bounds.push((elapsed * rate).round() as usize);
    }
    let total = *bounds.last().unwrap();
    let half = (CROSSFADE_SECONDS * rate / 2.0).round() as i64;
    let mut out = vec![0.0f64; total];

    // gain rising from 0 to 1 across [b - half, b + half)
    let rise = |n: i64, b: i64| -> f64 {
        if n < b - half {
            0.0
        } else if n >= b + half {
            1.0
        } else {
            let u = (n - (b - half)) as f64 / (2 * half) as f64;
            0.5 * (1.0 - (PI * u).cos())
        }
    };

    for (i, &(v, _)) in sequence.iter().enumerate() {
        let Some((f1, f2)) = formant_pair(v) else {
            continue;
        };
        let start = bounds[i] as i64;
        let end = bounds[i + 1] as i64;
        let first = i == 0;
        let last = i + 1 == sequence.len();
        let lo = if first { 0 } else { (start - half).max(0) };
        let hi = if last {
            end
        } else {
            (end + half).min(total as i64)
        };
        for n in lo..hi {
            let fade_in = if first { 1.0 } else { rise(n, start) };
            let fade_out = if last { 1.0 } else { 1.0 - rise(n, end) };
            let t = (n - start) as f64 / rate;
            let s = FORMANT_AMPLITUDE * ((2.0 * PI * f1 * t).sin() + (2.0 * PI * f2 * t).sin());
            out[n as usize] += fade_in * fade_out * s;
        }
    }
    AudioClip::new(
        out.into_iter().map(|x| x as f32).collect(),
        CANONICAL_RATE_HZ,
    )
}

/// Calibration matching the stub voice: one 0.5 s synthesized recording per vowel.
pub fn formant_calibration() -> CalibrationSet {
    let clips = Viseme::VOWELS
        .iter()
        .map(|&v| (v, synthesize_vowels(&[(v, CALIBRATION_SECONDS)])))
        .collect();
    calibrate(&clips, DEFAULT_SILENCE_RMS_THRESHOLD).expect("stub vowels are always voiced")
}
