// Frame a clip and print its MFCC features.
//
//     cargo run --example mfcc_features

use std::error::Error;
use std::io::Write;

use vtutor::audio::{analysis_frames, FrameSpec, MfccExtractor};
use vtutor::tts::synthesize_vowels;
use vtutor::viseme::Viseme;

pub fn run_example(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let clip = synthesize_vowels(&[(Viseme::A, 0.1), (Viseme::U, 0.1)]);
    let spec = FrameSpec::default();
    let frames = analysis_frames(&clip, &spec);
    writeln!(
        out,
        "{} samples at {} Hz -> {} frames",
        clip.len(),
        clip.sample_rate_hz(),
        frames.len()
    )?;

    let ex = MfccExtractor::new();
    let rate = clip.sample_rate_hz() as f64;
    for f in frames.iter().step_by(4) {
        let m = ex.compute(&f.samples, f.start as f64 / rate);
        let c: Vec<String> = m
            .coefficients
            .iter()
            .take(4)
            .map(|c| format!("{c:+.3}"))
            .collect();
        writeln!(
            out,
            "t={:.2}s rms={:.3} c1..c4=[{}]",
            m.t_start_seconds,
            m.frame_rms,
            c.join(", ")
        )?;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example(&mut std::io::stdout())
}
