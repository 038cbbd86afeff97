// Turn a WAV into a smoothed viseme timeline, the same thing `vtutor lipsync` writes.
//
//     cargo run --example lipsync_timeline [file.wav]

use std::error::Error;
use std::io::Write;

use vtutor::audio::read_wav_file;
use vtutor::tts::{formant_calibration, FormantStub, TtsEngine, TtsRequest};
use vtutor::viseme::generate_timeline;

pub fn run_example(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let clip = match std::env::args().nth(1).filter(|a| a.ends_with(".wav")) {
        Some(path) => read_wav_file(path)?,
        None => FormantStub.synthesize(&TtsRequest::new("Hello, tutor!"))?,
    };
    let timeline = generate_timeline(&clip, &formant_calibration());
    writeln!(
        out,
        "{:.2}s of audio -> {} frames every {} ms",
        timeline.audio_duration_seconds,
        timeline.frames.len(),
        timeline.hop_seconds * 1e3
    )?;
    let mut t = 0.0;
    for (v, n) in timeline.dominant_runs() {
        writeln!(out, "{t:5.2}s  {v:<3} x{n}")?;
        t += n as f64 * timeline.hop_seconds;
    }
    writeln!(out, "json: {} bytes", timeline.to_json().len())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example(&mut std::io::stdout())
}
