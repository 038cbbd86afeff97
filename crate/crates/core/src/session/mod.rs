//! Agent sessions: text turns in, ordered speech-plus-viseme events out.
//!
//! A session is `idle`, `speaking` or `closed`. [`Orchestrator::speak`] moves
//! it to `speaking` and returns an [`UtteranceStream`], a lazy iterator of
//! [`SessionEvent`]s. The stream yields `UtteranceStart` once the TTS audio
//! and the first smoothed viseme frame exist, then interleaves 100 ms audio
//! chunks with the viseme frames they cover, and finishes with `UtteranceEnd`
//! carrying the measured first-event latency. Only one utterance may be in
//! flight per session; a second `speak` gets `SessionBusy`.

mod text_source;
mod utterance;

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

pub use text_source::{
    EchoSource, HttpLlmSource, ScriptedSource, TextSource, TextSourceDescriptor, TextSourceKind,
    TurnContext,
};
pub use utterance::{Utterance, UtteranceStream, AUDIO_CHUNK_SECONDS};

use crate::audio::{shared_extractor, AudioClip, MfccExtractor};
use crate::tts::{TtsEngine, TtsError};
use crate::viseme::{CalibrationSet, VisemeFrame};

/// Conversation turns kept per session.
pub const HISTORY_CAP: usize = 50;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SessionError {
    #[error("no session {0}")]
    NoSession(String),
    #[error("session is closed")]
    SessionClosed,
    #[error("session is already speaking")]
    SessionBusy,
    #[error("scripted text source has no replies left")]
    ScriptExhausted,
    #[error("text service unreachable: {0}")]
    ServiceUnreachable(String),
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::NoSession(_) => "no_session",
            SessionError::SessionClosed => "session_closed",
            SessionError::SessionBusy => "session_busy",
            SessionError::ScriptExhausted => "script_exhausted",
            SessionError::ServiceUnreachable(_) => "service_unreachable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Idle,
    Speaking,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub session_id: String,
    pub avatar_id: String,
    pub persona_prompt: String,
    pub state: SessionState,
    pub utterance_counter: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub user: String,
    pub agent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub first_event_latency_seconds: f64,
    pub audio_duration_seconds: f64,
    /// TTS engine that produced the audio, or `client_audio` for uploaded WAV.
    pub engine_kind: String,
}

/// Event payloads, independent of wire framing.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentEvent {
    UtteranceStart {
        text: String,
    },
    AudioChunk {
        t_start: f64,
        sample_rate_hz: u32,
        pcm: Vec<i16>,
    },
    Viseme(VisemeFrame),
    UtteranceEnd {
        report: LatencyReport,
        aborted: bool,
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

impl AgentEvent {
    pub fn error(code: impl Into<String>, message: impl ToString) -> Self {
        AgentEvent::Error {
            code: code.into(),
            message: message.to_string(),
        }
    }

    pub fn from_tts_error(e: &TtsError) -> Self {
        Self::error(e.code(), e)
    }

    pub fn from_session_error(e: &SessionError) -> Self {
        Self::error(e.code(), e)
    }
}

/// An event addressed to a session and utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionEvent {
    pub session_id: String,
    pub utterance_id: u64,
    pub event: AgentEvent,
}

pub(crate) struct SessionCell {
    inner: Mutex<SessionInner>,
    abort: AtomicBool,
}

struct SessionInner {
    session: Session,
    history: VecDeque<Turn>,
}

impl SessionCell {
    fn snapshot(&self) -> Session {
        self.inner.lock().unwrap().session.clone()
    }

    /// Speaking -> idle, unless the session was closed meanwhile.
    pub(crate) fn finish_speaking(&self) {
        let mut inner = self.inner.lock().unwrap();
        if inner.session.state == SessionState::Speaking {
            inner.session.state = SessionState::Idle;
        }
    }

    pub(crate) fn aborted(&self) -> bool {
        self.abort.load(Ordering::SeqCst)
    }
}

/// Session registry and pipeline driver. Cheap to share behind an `Arc`.
pub struct Orchestrator {
    sessions: Mutex<HashMap<String, Arc<SessionCell>>>,
    extractor: Arc<MfccExtractor>,
}

impl Default for Orchestrator {
    fn default() -> Self {
        Self::new()
    }
}

impl Orchestrator {
    pub fn new() -> Self {
        Self {
            sessions: Mutex::new(HashMap::new()),
            extractor: shared_extractor(),
        }
    }

    fn cell(&self, session_id: &str) -> Result<Arc<SessionCell>, SessionError> {
        self.sessions
            .lock()
            .unwrap()
            .get(session_id)
            .cloned()
            .ok_or_else(|| SessionError::NoSession(session_id.to_string()))
    }

    pub fn open_session(&self, avatar_id: &str, persona_prompt: &str) -> Session {
        let mut sessions = self.sessions.lock().unwrap();
        let session_id = loop {
            let id = uuid::Uuid::new_v4().to_string();
            if !sessions.contains_key(&id) {
                break id;
            }
        };
        let session = Session {
            session_id: session_id.clone(),
            avatar_id: avatar_id.to_string(),
            persona_prompt: persona_prompt.to_string(),
            state: SessionState::Idle,
            utterance_counter: 0,
        };
        sessions.insert(
            session_id,
            Arc::new(SessionCell {
                inner: Mutex::new(SessionInner {
                    session: session.clone(),
                    history: VecDeque::new(),
                }),
                abort: AtomicBool::new(false),
            }),
        );
        session
    }

    pub fn session(&self, session_id: &str) -> Result<Session, SessionError> {
        Ok(self.cell(session_id)?.snapshot())
    }

    pub fn history(&self, session_id: &str) -> Result<Vec<Turn>, SessionError> {
        let cell = self.cell(session_id)?;
        let inner = cell.inner.lock().unwrap();
        Ok(inner.history.iter().cloned().collect())
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    fn require_idle(session: &Session) -> Result<(), SessionError> {
        match session.state {
            SessionState::Idle => Ok(()),
            SessionState::Speaking => Err(SessionError::SessionBusy),
            SessionState::Closed => Err(SessionError::SessionClosed),
        }
    }

    fn require_open(session: &Session) -> Result<(), SessionError> {
        if session.state == SessionState::Closed {
            Err(SessionError::SessionClosed)
        } else {
            Ok(())
        }
    }

    /// Asks the text source for a reply and records the turn.
    pub fn user_turn(
        &self,
        session_id: &str,
        user_text: &str,
        source: &dyn TextSource,
    ) -> Result<String, SessionError> {
        let cell = self.cell(session_id)?;
        let (persona, history) = {
            let inner = cell.inner.lock().unwrap();
            Self::require_idle(&inner.session)?;
            (
                inner.session.persona_prompt.clone(),
                inner.history.iter().cloned().collect::<Vec<_>>(),
            )
        };
        let reply = source.reply(&TurnContext {
            persona_prompt: &persona,
            history: &history,
            user_text,
        })?;
        let mut inner = cell.inner.lock().unwrap();
        inner.history.push_back(Turn {
            user: user_text.to_string(),
            agent: reply.clone(),
        });
        while inner.history.len() > HISTORY_CAP {
            inner.history.pop_front();
        }
        Ok(reply)
    }

    fn begin_utterance(&self, session_id: &str) -> Result<(Arc<SessionCell>, u64), SessionError> {
        let cell = self.cell(session_id)?;
        let utterance_id = {
            let mut inner = cell.inner.lock().unwrap();
            Self::require_idle(&inner.session)?;
            inner.session.state = SessionState::Speaking;
            inner.session.utterance_counter += 1;
            inner.session.utterance_counter
        };
        Ok((cell, utterance_id))
    }

    /// Synthesizes `agent_text` and streams its audio and visemes.
    pub fn speak(
        &self,
        session_id: &str,
        agent_text: &str,
        engine: Arc<dyn TtsEngine>,
        cal: Arc<CalibrationSet>,
    ) -> Result<UtteranceStream, SessionError> {
        let t_request = std::time::Instant::now();
        let (cell, utterance_id) = self.begin_utterance(session_id)?;
        Ok(UtteranceStream::from_tts(
            cell,
            session_id.to_string(),
            utterance_id,
            agent_text.to_string(),
            engine,
            cal,
            self.extractor.clone(),
            t_request,
        ))
    }

    /// Streams already-decoded audio (e.g. an uploaded WAV) instead of running TTS.
    pub fn speak_clip(
        &self,
        session_id: &str,
        clip: AudioClip,
        cal: Arc<CalibrationSet>,
    ) -> Result<UtteranceStream, SessionError> {
        let t_request = std::time::Instant::now();
        let (cell, utterance_id) = self.begin_utterance(session_id)?;
        Ok(UtteranceStream::from_clip(
            cell,
            session_id.to_string(),
            utterance_id,
            clip,
            cal,
            self.extractor.clone(),
            t_request,
        ))
    }

    fn control_event(
        &self,
        session_id: &str,
        update: impl FnOnce(&mut Session) -> AgentEvent,
    ) -> Result<SessionEvent, SessionError> {
        let cell = self.cell(session_id)?;
        let mut inner = cell.inner.lock().unwrap();
        Self::require_open(&inner.session)?;
        let event = update(&mut inner.session);
        Ok(SessionEvent {
            session_id: session_id.to_string(),
            utterance_id: inner.session.utterance_counter,
            event,
        })
    }

    /// Allowed while idle or speaking.
    pub fn set_expression(
        &self,
        session_id: &str,
        name: &str,
    ) -> Result<SessionEvent, SessionError> {
        self.control_event(session_id, |_| AgentEvent::Expression {
            name: name.to_string(),
        })
    }

    pub fn set_gesture(&self, session_id: &str, name: &str) -> Result<SessionEvent, SessionError> {
        self.control_event(session_id, |_| AgentEvent::Gesture {
            name: name.to_string(),
        })
    }

    pub fn switch_avatar(
        &self,
        session_id: &str,
        avatar_id: &str,
    ) -> Result<SessionEvent, SessionError> {
        self.control_event(session_id, |s| {
            s.avatar_id = avatar_id.to_string();
            AgentEvent::AvatarSwitched {
                avatar_id: avatar_id.to_string(),
            }
        })
    }

    /// Closes the session; an in-flight stream ends with an aborted `UtteranceEnd`.
    /// Closing twice is a no-op.
    pub fn close_session(&self, session_id: &str) -> Result<Session, SessionError> {
        let cell = self.cell(session_id)?;
        let mut inner = cell.inner.lock().unwrap();
        if inner.session.state == SessionState::Speaking {
            cell.abort.store(true, Ordering::SeqCst);
        }
        inner.session.state = SessionState::Closed;
        Ok(inner.session.clone())
    }

    /// Drops a session from the registry (after close, when its connection goes away).
    pub fn remove_session(&self, session_id: &str) {
        if let Some(cell) = self.sessions.lock().unwrap().remove(session_id) {
            cell.abort.store(true, Ordering::SeqCst);
        }
    }
}
