// Drive a tutoring session in-process: a scripted reply source, one spoken
// utterance streamed event by event, and a control event.
//
//     cargo run --example session_stream

use std::error::Error;
use std::io::Write;
use std::sync::Arc;

use vtutor::session::{AgentEvent, Orchestrator, ScriptedSource};
use vtutor::tts::{formant_calibration, FormantStub};

pub fn run_example(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let orch = Orchestrator::new();
    let session = orch.open_session("tutor", "You are a patient math tutor.");
    let id = &session.session_id;
    let script = ScriptedSource::new(["Let's add fractions together."]);

    let reply = orch.user_turn(id, "Can you help me?", &script)?;
    let stream = orch.speak(
        id,
        &reply,
        Arc::new(FormantStub),
        Arc::new(formant_calibration()),
    )?;
    writeln!(out, "utterance {} of session {}", stream.utterance_id(), id)?;
    let (mut chunks, mut visemes) = (0, 0);
    for e in stream {
        match e.event {
            AgentEvent::UtteranceStart { text } => writeln!(out, "start: {text:?}")?,
            AgentEvent::AudioChunk { .. } => chunks += 1,
            AgentEvent::Viseme(_) => visemes += 1,
            AgentEvent::UtteranceEnd { report, aborted } => writeln!(
                out,
                "end: {chunks} chunks, {visemes} visemes, {:.2}s audio, first event after {:.1} ms, aborted={aborted}",
                report.audio_duration_seconds,
                report.first_event_latency_seconds * 1e3
            )?,
            other => writeln!(out, "{other:?}")?,
        }
    }

    let smile = orch.set_expression(id, "smile")?;
    writeln!(out, "control: {:?}", smile.event)?;
    writeln!(out, "history: {} turn(s)", orch.history(id)?.len())?;
    orch.close_session(id)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example(&mut std::io::stdout())
}
