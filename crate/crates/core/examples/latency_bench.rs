// Time from speak request to the first streamed event, per engine.
//
//     cargo run --release --example latency_bench

use std::error::Error;
use std::io::Write;
use std::path::PathBuf;

use vtutor::cli::bench;
use vtutor::tts::{formant_calibration, TtsEngineDescriptor};

pub fn run_example(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/tts");
    for desc in [
        TtsEngineDescriptor::formant_stub(),
        TtsEngineDescriptor::fixture_dir(fixtures),
    ] {
        let report = bench(7.0, &desc, formant_calibration(), 3)?;
        let runs: Vec<String> = report
            .runs
            .iter()
            .map(|r| format!("{:.1}", r.first_event_latency_seconds * 1e3))
            .collect();
        writeln!(
            out,
            "{:<12} 7 s utterance: first event after [{}] ms, worst {:.1} ms",
            report.runs[0].engine_kind,
            runs.join(", "),
            report.first_event_latency_seconds * 1e3
        )?;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example(&mut std::io::stdout())
}
