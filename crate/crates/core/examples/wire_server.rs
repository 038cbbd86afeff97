// Start the WebSocket server on an ephemeral port and talk to it as a client would.
// Pass `--serve` to keep it running and open /demo in a browser.
//
//     cargo run --example wire_server [-- --serve]

use std::error::Error;
use std::io::Write;

use futures::{SinkExt, StreamExt};
use tokio_tungstenite::tungstenite::Message;
use vtutor::tts::formant_calibration;
use vtutor::wire::{decode_event, encode_command, serve, ClientCommand, EventBody, ServerConfig};

async fn session(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let server = serve(
        "127.0.0.1:0".parse()?,
        ServerConfig::new(formant_calibration()),
    )
    .await?;
    let addr = server.local_addr();
    writeln!(out, "listening on ws://{addr}/agent")?;

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/agent")).await?;
    for cmd in [
        ClientCommand::Open {
            avatar_id: "tutor".into(),
            persona_prompt: String::new(),
        },
        ClientCommand::SpeakText {
            text: "Welcome back!".into(),
        },
    ] {
        ws.send(Message::Text(encode_command(&cmd).into())).await?;
    }
    while let Some(msg) = ws.next().await {
        let Message::Text(text) = msg? else { continue };
        let e = decode_event(text.as_bytes())?;
        match &e.body {
            EventBody::AudioChunk { .. } | EventBody::Viseme { .. } => {}
            body => writeln!(
                out,
                "seq {:>3} utterance {}: {}",
                e.seq,
                e.utterance_id,
                body.type_name()
            )?,
        }
        if matches!(e.body, EventBody::UtteranceEnd { .. }) {
            break;
        }
    }
    ws.close(None).await?;

    if std::env::args().any(|a| a == "--serve") {
        writeln!(out, "demo page at http://{addr}/demo (ctrl-c to stop)")?;
        out.flush()?;
        server.wait().await;
    } else {
        server.shutdown().await;
    }
    Ok(())
}

pub fn run_example(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    tokio::runtime::Runtime::new()?.block_on(session(out))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example(&mut std::io::stdout())
}
