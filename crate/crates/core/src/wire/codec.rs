use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::session::{AgentEvent, LatencyReport, SessionEvent};
use crate::viseme::{Viseme, VisemeFrame, VisemeWeights};

use super::WireError;

/// One server-to-client message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEvent {
    pub session_id: String,
    pub utterance_id: u64,
    pub seq: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    UtteranceStart {
        text: String,
    },
    AudioChunk {
        t_start: f64,
        rate: u32,
        /// Base64 of 16-bit little-endian PCM.
        pcm_b64: String,
    },
    Viseme {
        t: f64,
        weights: VisemeWeights,
        dominant: Viseme,
    },
    UtteranceEnd {
        latency_seconds: f64,
        aborted: bool,
        audio_duration_seconds: f64,
        engine_kind: String,
    },
    Expression {
        name: String,
    },
    Gesture {
        name: String,
    },
    AvatarSwitched {
        avatar_id: String,
    },
    Error {
        code: String,
        message: String,
    },
}

impl EventBody {
    pub fn type_name(&self) -> &'static str {
        match self {
            EventBody::UtteranceStart { .. } => "utterance_start",
            EventBody::AudioChunk { .. } => "audio_chunk",
            EventBody::Viseme { .. } => "viseme",
            EventBody::UtteranceEnd { .. } => "utterance_end",
            EventBody::Expression { .. } => "expression",
            EventBody::Gesture { .. } => "gesture",
            EventBody::AvatarSwitched { .. } => "avatar_switched",
            EventBody::Error { .. } => "error",
        }
    }

    pub fn from_agent_event(event: &AgentEvent) -> Self {
        match event {
            AgentEvent::UtteranceStart { text } => EventBody::UtteranceStart { text: text.clone() },
            AgentEvent::AudioChunk {
                t_start,
                sample_rate_hz,
                pcm,
            } => EventBody::AudioChunk {
                t_start: *t_start,
                rate: *sample_rate_hz,
                pcm_b64: encode_pcm(pcm),
            },
            AgentEvent::Viseme(f) => EventBody::Viseme {
                t: f.t_seconds,
                weights: f.weights,
                dominant: f.dominant,
            },
            AgentEvent::UtteranceEnd { report, aborted } => EventBody::UtteranceEnd {
                latency_seconds: report.first_event_latency_seconds,
                aborted: *aborted,
                audio_duration_seconds: report.audio_duration_seconds,
                engine_kind: report.engine_kind.clone(),
            },
            AgentEvent::Expression { name } => EventBody::Expression { name: name.clone() },
            AgentEvent::Gesture { name } => EventBody::Gesture { name: name.clone() },
            AgentEvent::AvatarSwitched { avatar_id } => EventBody::AvatarSwitched {
                avatar_id: avatar_id.clone(),
            },
            AgentEvent::Error { code, message } => EventBody::Error {
                code: code.clone(),
                message: message.clone(),
            },
        }
    }

    pub fn to_agent_event(&self) -> Result<AgentEvent, WireError> {
        Ok(match self {
            EventBody::UtteranceStart { text } => AgentEvent::UtteranceStart { text: text.clone() },
            EventBody::AudioChunk {
                t_start,
                rate,
                pcm_b64,
            } => AgentEvent::AudioChunk {
                t_start: *t_start,
                sample_rate_hz: *rate,
                pcm: decode_pcm(pcm_b64)?,
            },
            EventBody::Viseme {
                t,
                weights,
                dominant,
            } => AgentEvent::Viseme(VisemeFrame {
                t_seconds: *t,
                weights: *weights,
                dominant: *dominant,
            }),
            EventBody::UtteranceEnd {
                latency_seconds,
                aborted,
                audio_duration_seconds,
                engine_kind,
            } => AgentEvent::UtteranceEnd {
                report: LatencyReport {
                    first_event_latency_seconds: *latency_seconds,
                    audio_duration_seconds: *audio_duration_seconds,
                    engine_kind: engine_kind.clone(),
                },
                aborted: *aborted,
            },
            EventBody::Expression { name } => AgentEvent::Expression { name: name.clone() },
            EventBody::Gesture { name } => AgentEvent::Gesture { name: name.clone() },
            EventBody::AvatarSwitched { avatar_id } => AgentEvent::AvatarSwitched {
                avatar_id: avatar_id.clone(),
            },
            EventBody::Error { code, message } => AgentEvent::Error {
                code: code.clone(),
                message: message.clone(),
            },
        })
    }
}

impl WireEvent {
    pub fn new(event: &SessionEvent, seq: u64) -> Self {
        Self {
            session_id: event.session_id.clone(),
            utterance_id: event.utterance_id,
            seq,
            body: EventBody::from_agent_event(&event.event),
        }
    }

    pub fn to_session_event(&self) -> Result<SessionEvent, WireError> {
        Ok(SessionEvent {
            session_id: self.session_id.clone(),
            utterance_id: self.utterance_id,
            event: self.body.to_agent_event()?,
        })
    }
}

/// Client-to-server message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    tag = "type",
    content = "payload",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum ClientCommand {
    Open {
        avatar_id: String,
        #[serde(default)]
        persona_prompt: String,
    },
    UserTurn {
        text: String,
    },
    SpeakText {
        text: String,
    },
    SpeakAudio {
        /// Base64 of a complete WAV file.
        wav_b64: String,
    },
    SetExpression {
        name: String,
    },
    SetGesture {
        name: String,
    },
    SwitchAvatar {
        avatar_id: String,
    },
    Close,
}

impl ClientCommand {
    pub fn type_name(&self) -> &'static str {
        match self {
            ClientCommand::Open { .. } => "open",
            ClientCommand::UserTurn { .. } => "user_turn",
            ClientCommand::SpeakText { .. } => "speak_text",
            ClientCommand::SpeakAudio { .. } => "speak_audio",
            ClientCommand::SetExpression { .. } => "set_expression",
            ClientCommand::SetGesture { .. } => "set_gesture",
            ClientCommand::SwitchAvatar { .. } => "switch_avatar",
            ClientCommand::Close => "close",
        }
    }
}

pub fn encode_pcm(pcm: &[i16]) -> String {
    let bytes: Vec<u8> = pcm.iter().flat_map(|s| s.to_le_bytes()).collect();
    B64.encode(bytes)
}

pub fn decode_pcm(b64: &str) -> Result<Vec<i16>, WireError> {
    let bytes = B64
        .decode(b64)
        .map_err(|e| WireError::MalformedEvent(format!("pcm_b64: {e}")))?;
    if bytes.len() % 2 != 0 {
        return Err(WireError::MalformedEvent("pcm_b64: odd byte count".into()));
    }
    Ok(bytes
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]))
        .collect())
}

pub fn encode_event(event: &WireEvent) -> String {
    serde_json::to_string(event).expect("wire events are always representable")
}

pub fn decode_event(bytes: &[u8]) -> Result<WireEvent, WireError> {
    serde_json::from_slice(bytes).map_err(|e| WireError::MalformedEvent(e.to_string()))
}

pub fn encode_command(command: &ClientCommand) -> String {
    serde_json::to_string(command).expect("commands are always representable")
}

pub fn decode_command(bytes: &[u8]) -> Result<ClientCommand, WireError> {
    serde_json::from_slice(bytes).map_err(|e| WireError::MalformedCommand(e.to_string()))
}

/// Assigns per-utterance sequence numbers.
///
/// The counter restarts at 0 whenever the utterance id changes. Control
/// events reuse the current utterance id and take the next number.
#[derive(Debug, Default)]
pub struct Sequencer {
    current: Option<(String, u64)>,
    next: u64,
}

impl Sequencer {
    pub fn next(&mut self, session_id: &str, utterance_id: u64) -> u64 {
        let same = matches!(&self.current, Some((s, u)) if s == session_id && *u == utterance_id);
        if !same {
            self.current = Some((session_id.to_string(), utterance_id));
            self.next = 0;
        }
        let seq = self.next;
        self.next += 1;
        seq
    }
}
