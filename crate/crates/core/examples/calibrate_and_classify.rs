// Build a calibration set from labeled vowel clips, save it, and classify fresh audio.
//
//     cargo run --example calibrate_and_classify

use std::collections::BTreeMap;
use std::error::Error;
use std::io::Write;

use vtutor::audio::{analysis_frames, AudioClip, FrameSpec, MfccExtractor};
use vtutor::tts::synthesize_vowels;
use vtutor::viseme::{
    calibrate, classify_frame, CalibrationSet, Viseme, DEFAULT_SILENCE_RMS_THRESHOLD,
};

pub fn run_example(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let clips: BTreeMap<Viseme, AudioClip> = Viseme::VOWELS
        .into_iter()
        .map(|v| (v, synthesize_vowels(&[(v, 0.5)])))
        .collect();
    let cal = calibrate(&clips, DEFAULT_SILENCE_RMS_THRESHOLD)?;
    for p in cal.profiles() {
        writeln!(out, "{}: {} voiced frames", p.viseme, p.sample_count)?;
    }

    let path = std::env::temp_dir().join(format!("vtutor-calibration-{}.json", std::process::id()));
    cal.save(&path)?;
    let cal = CalibrationSet::load(&path)?;
    std::fs::remove_file(&path)?;

    let ex = MfccExtractor::new();
    let probe = synthesize_vowels(&[(Viseme::O, 0.2)]).scaled(0.6);
    let frame = &analysis_frames(&probe, &FrameSpec::default())[5];
    let f = classify_frame(
        &ex.compute(&frame.samples, frame.start as f64 / 16_000.0),
        &cal,
    );
    let weights: Vec<String> = Viseme::ALL
        .iter()
        .map(|&v| format!("{v}={:.2}", f.weights.get(v)))
        .collect();
    writeln!(
        out,
        "probe O at t={:.2}s -> {} ({})",
        f.t_seconds,
        f.dominant,
        weights.join(" ")
    )?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example(&mut std::io::stdout())
}
