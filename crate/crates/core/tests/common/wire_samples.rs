//! One value of every event and command type, with awkward content.

use vtutor::session::{AgentEvent, LatencyReport};
use vtutor::viseme::{VisemeFrame, VisemeWeights};
use vtutor::wire::ClientCommand;

pub fn representative_events() -> Vec<AgentEvent> {
    vec![
        AgentEvent::UtteranceStart {
            text: "Héllo, \"world\"\n".into(),
        },
        AgentEvent::AudioChunk {
            t_start: 0.1,
            sample_rate_hz: 16_000,
            pcm: vec![0, 1, -1, i16::MAX, i16::MIN, 1234],
        },
        AgentEvent::Viseme(VisemeFrame::new(
            0.37,
            VisemeWeights([0.1, 0.2, 0.3, 0.15, 0.25, 0.0]),
        )),
        AgentEvent::UtteranceEnd {
            report: LatencyReport {
                first_event_latency_seconds: 0.012_345_678_9,
                audio_duration_seconds: 7.0,
                engine_kind: "formant_stub".into(),
            },
            aborted: true,
        },
        AgentEvent::Expression {
            name: "smile".into(),
        },
        AgentEvent::Gesture {
            name: "wave".into(),
        },
        AgentEvent::AvatarSwitched {
            avatar_id: "robot-2".into(),
        },
        AgentEvent::Error {
            code: "session_busy".into(),
            message: "session is already speaking".into(),
        },
    ]
}

pub fn representative_commands() -> Vec<ClientCommand> {
    vec![
        ClientCommand::Open {
            avatar_id: "tutor".into(),
            persona_prompt: "You are a patient chemistry tutor.".into(),
        },
        ClientCommand::UserTurn {
            text: "What is a mole?".into(),
        },
        ClientCommand::SpeakText {
            text: "a e i o u".into(),
        },
        ClientCommand::SpeakAudio {
            wav_b64: "UklGRiQAAABXQVZF".into(),
        },
        ClientCommand::SetExpression {
            name: "surprised".into(),
        },
        ClientCommand::SetGesture { name: "nod".into() },
        ClientCommand::SwitchAvatar {
            avatar_id: "robot".into(),
        },
        ClientCommand::Close,
    ]
}
