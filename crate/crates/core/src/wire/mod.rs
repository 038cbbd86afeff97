//! WebSocket boundary: JSON codec for events and commands, plus the server.
//!
//! Every message is one JSON text frame shaped as
//! `{"type": ..., "payload": {...}}`; server events also carry
//! `session_id`, `utterance_id` and a per-utterance `seq`.

mod codec;
mod server;

pub use codec::{
    decode_command, decode_event, decode_pcm, encode_command, encode_event, encode_pcm,
    ClientCommand, EventBody, Sequencer, WireEvent,
};
pub use server::{serve, ServerConfig, ServerHandle};

/// Built-in embed snippet served at `/embed.js`.
pub const EMBED_JS: &str = include_str!("assets/embed.js");
/// Built-in demo page served at `/demo`.
pub const DEMO_HTML: &str = include_str!("assets/demo.html");

#[derive(Debug, Clone, thiserror::Error)]
pub enum WireError {
    #[error("malformed command: {0}")]
    MalformedCommand(String),
    #[error("malformed event: {0}")]
    MalformedEvent(String),
    #[error("cannot bind {0}")]
    BindFailure(String),
    #[error("invalid server configuration: {0}")]
    Config(String),
}

impl WireError {
    pub fn code(&self) -> &'static str {
        match self {
            WireError::MalformedCommand(_) => "bad_command",
            WireError::MalformedEvent(_) => "bad_event",
            WireError::BindFailure(_) => "bind_failure",
            WireError::Config(_) => "bad_config",
        }
    }
}
