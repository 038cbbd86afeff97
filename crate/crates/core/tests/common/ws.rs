//! Scripted WebSocket client for the server tests.

use std::time::Duration;

use futures::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};
use vtutor::wire::{decode_event, encode_command, ClientCommand, EventBody, WireEvent};

pub struct Client {
    ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
}

impl Client {
    pub async fn connect(addr: std::net::SocketAddr) -> Self {
        let (ws, _) = connect_async(format!("ws://{addr}/agent")).await.unwrap();
        Self { ws }
    }

    pub async fn send(&mut self, cmd: &ClientCommand) {
        self.send_raw(&encode_command(cmd)).await;
    }

    pub async fn send_raw(&mut self, text: &str) {
        self.ws
            .send(Message::Text(text.to_string().into()))
            .await
            .unwrap();
    }

    /// Next event, or `None` if nothing arrives within `wait`.
    pub async fn recv_within(&mut self, wait: Duration) -> Option<WireEvent> {
        loop {
            let msg = tokio::time::timeout(wait, self.ws.next())
                .await
                .ok()??
                .ok()?;
            if let Message::Text(t) = msg {
                return Some(decode_event(t.as_bytes()).expect("server sent a valid event"));
            }
        }
    }

    pub async fn recv(&mut self) -> WireEvent {
        self.recv_within(Duration::from_secs(30))
            .await
            .expect("event before timeout")
    }

    /// Events up to and including the next `utterance_end`.
    pub async fn recv_utterance(&mut self) -> Vec<WireEvent> {
        let mut out = Vec::new();
        loop {
            let e = self.recv().await;
            let end = matches!(e.body, EventBody::UtteranceEnd { .. });
            out.push(e);
            if end {
                return out;
            }
        }
    }

    /// Opens a session and returns its id (taken from the acknowledgment).
    pub async fn open(&mut self, avatar: &str) -> String {
        self.send(&ClientCommand::Open {
            avatar_id: avatar.into(),
            persona_prompt: String::new(),
        })
        .await;
        let ack = self.recv().await;
        assert_eq!(
            ack.body,
            EventBody::AvatarSwitched {
                avatar_id: avatar.into()
            }
        );
        ack.session_id
    }
}

pub fn count(events: &[WireEvent], type_name: &str) -> usize {
    events
        .iter()
        .filter(|e| e.body.type_name() == type_name)
        .count()
}

/// Utterance-level stream checks: one utterance id, seq 0.. without gaps,
/// start first, end last, chunk ranges before the visemes inside them,
/// strictly increasing viseme times.
pub fn check_stream(events: &[WireEvent]) -> Result<(), String> {
    let first = events.first().ok_or("no events")?;
    if first.body.type_name() != "utterance_start" {
        return Err(format!("first event is {}", first.body.type_name()));
    }
    if events.last().unwrap().body.type_name() != "utterance_end" {
        return Err("last event is not utterance_end".into());
    }
    let base = first.seq;
    let mut covered = 0.0;
    let mut last_t = f64::NEG_INFINITY;
    for (i, e) in events.iter().enumerate() {
        if e.utterance_id != first.utterance_id || e.session_id != first.session_id {
            return Err(format!("event {i} belongs to another utterance"));
        }
        if e.seq != base + i as u64 {
            return Err(format!(
                "seq gap at {i}: {} after {}",
                e.seq,
                base + i as u64 - 1
            ));
        }
        match &e.body {
            EventBody::AudioChunk {
                t_start,
                rate,
                pcm_b64,
            } => {
                let n = vtutor::wire::decode_pcm(pcm_b64)
                    .map_err(|e| e.to_string())?
                    .len();
                if n > *rate as usize / 10 {
                    return Err(format!("chunk of {n} samples exceeds 100 ms"));
                }
                covered = t_start + n as f64 / *rate as f64;
            }
            EventBody::Viseme { t, .. } => {
                if *t >= covered {
                    return Err(format!(
                        "viseme at {t} before its audio (covered to {covered})"
                    ));
                }
                if *t <= last_t {
                    return Err(format!("viseme time {t} not after {last_t}"));
                }
                last_t = *t;
            }
            _ => {}
        }
    }
    Ok(())
}
