// The three speech back ends behind one descriptor: the formant stub, a
// directory of pre-rendered WAVs, and an HTTP service (a local stand-in here).
//
//     cargo run --example tts_engines

use std::error::Error;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;

use vtutor::audio::encode_wav;
use vtutor::cli::bench_text;
use vtutor::tts::{synthesize, FormantStub, TtsEngine, TtsEngineDescriptor, TtsRequest};

/// Answers one POST with a fixed WAV body.
fn one_shot_service(wav: Vec<u8>) -> std::io::Result<String> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let url = format!("http://{}/tts", listener.local_addr()?);
    std::thread::spawn(move || -> std::io::Result<()> {
        let (mut stream, _) = listener.accept()?;
        let mut reader = BufReader::new(stream.try_clone()?);
        let mut len = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line)?;
            let line = line.trim_end().to_ascii_lowercase();
            if line.is_empty() {
                break;
            }
            if let Some(v) = line.strip_prefix("content-length:") {
                len = v.trim().parse().unwrap_or(0);
            }
        }
        reader.read_exact(&mut vec![0; len])?;
        write!(
            stream,
            "HTTP/1.1 200 OK\r\ncontent-type: audio/wav\r\ncontent-length: {}\r\n\r\n",
            wav.len()
        )?;
        stream.write_all(&wav)
    });
    Ok(url)
}

pub fn run_example(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let req = TtsRequest::new("How are you?");
    let clip = synthesize(&req, &TtsEngineDescriptor::formant_stub())?;
    writeln!(out, "formant_stub: {:.2}s", clip.duration_seconds())?;

    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/tts");
    let clip = synthesize(
        &TtsRequest::new(bench_text(7.0)),
        &TtsEngineDescriptor::fixture_dir(&dir),
    )?;
    writeln!(out, "fixture_dir: {:.2}s", clip.duration_seconds())?;
    match synthesize(&req, &TtsEngineDescriptor::fixture_dir(&dir)) {
        Ok(_) => writeln!(out, "fixture_dir: unexpected hit")?,
        Err(e) => writeln!(out, "fixture_dir miss: {}", e.code())?,
    }

    let url = one_shot_service(encode_wav(&FormantStub.synthesize(&req)?))?;
    let clip = synthesize(&req, &TtsEngineDescriptor::http_service(url, None))?;
    writeln!(
        out,
        "http_service: {:.2}s at {} Hz",
        clip.duration_seconds(),
        clip.sample_rate_hz()
    )?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example(&mut std::io::stdout())
}
