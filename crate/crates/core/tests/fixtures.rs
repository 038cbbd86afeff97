//! Bundled audio fixtures and the generators that wrote them.
//!
//! Regenerate with `cargo test --test fixtures -- --ignored`.

use std::f64::consts::PI;
use std::path::PathBuf;

use vtutor::audio::{read_wav_file, write_wav_file, AudioClip};
use vtutor::cli::bench_text;
use vtutor::tts::{fixture_key, formant_calibration, synthesize_vowels, CALIBRATION_SECONDS};
use vtutor::tts::{FormantStub, TtsEngine, TtsRequest};
use vtutor::viseme::{CalibrationSet, Viseme};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn sine_440() -> Vec<f64> {
    (0..16_000)
        .map(|n| 0.5 * (2.0 * PI * 440.0 * n as f64 / 16_000.0).sin())
        .collect()
}

fn vowel_clip(v: Viseme) -> AudioClip {
    synthesize_vowels(&[(v, CALIBRATION_SECONDS)])
}

#[test]
#[ignore = "rewrites the committed fixtures"]
fn regenerate_fixtures() {
    let root = fixtures();
    std::fs::create_dir_all(root.join("calibration")).unwrap();
    std::fs::create_dir_all(root.join("tts")).unwrap();
    let sine: Vec<f32> = sine_440().into_iter().map(|x| x as f32).collect();
    write_wav_file(
        root.join("sine_440hz_16k.wav"),
        &AudioClip::new(sine, 16_000),
    )
    .unwrap();
    for v in Viseme::VOWELS {
        write_wav_file(
            root.join(format!("calibration/{}.wav", v.label())),
            &vowel_clip(v),
        )
        .unwrap();
    }
    formant_calibration()
        .save(root.join("calibration/calibration.json"))
        .unwrap();
    let text = bench_text(7.0);
    let clip = FormantStub
        .synthesize(&TtsRequest::new(text.as_str()))
        .unwrap();
    write_wav_file(root.join(format!("tts/{}.wav", fixture_key(&text))), &clip).unwrap();
}

#[test]
fn sine_fixture_matches_generator() {
    let clip = read_wav_file(fixtures().join("sine_440hz_16k.wav")).unwrap();
    assert_eq!(clip.sample_rate_hz(), 16_000);
    assert_eq!(clip.len(), 16_000);
    for (got, want) in clip.samples().iter().zip(sine_440()) {
        assert!((*got as f64 - want).abs() <= 1.0 / 32768.0);
    }
}

#[test]
fn calibration_wavs_match_the_stub_voice() {
    for v in Viseme::VOWELS {
        let clip =
            read_wav_file(fixtures().join(format!("calibration/{}.wav", v.label()))).unwrap();
        let want = vowel_clip(v);
        assert_eq!(clip.len(), want.len());
        for (a, b) in clip.samples().iter().zip(want.samples()) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }
}

#[test]
fn committed_calibration_is_the_stub_calibration() {
    let committed = CalibrationSet::load(fixtures().join("calibration/calibration.json")).unwrap();
    assert_eq!(committed, formant_calibration());
}

#[test]
fn seven_second_tts_fixture_present() {
    let text = bench_text(7.0);
    let clip = read_wav_file(fixtures().join(format!("tts/{}.wav", fixture_key(&text)))).unwrap();
    assert!((clip.duration_seconds() - 7.0).abs() < 1e-9);
}
