use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::header;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use base64::Engine as _;
use futures::{SinkExt, StreamExt};
use tokio::sync::{mpsc, oneshot};

use super::codec::{decode_command, encode_event, ClientCommand, Sequencer, WireEvent};
use super::{WireError, DEMO_HTML, EMBED_JS};
use crate::audio::decode_wav;
use crate::session::{
    AgentEvent, Orchestrator, SessionError, SessionEvent, SessionState, TextSource,
    TextSourceDescriptor, UtteranceStream,
};
use crate::tts::{engine_from_descriptor, TtsEngine, TtsEngineDescriptor};
use crate::viseme::CalibrationSet;

#[derive(Clone)]
pub struct ServerConfig {
    pub calibration: Arc<CalibrationSet>,
    pub tts: TtsEngineDescriptor,
    pub text_source: TextSourceDescriptor,
    /// Directory whose `embed.js` / `demo.html` override the built-in assets.
    pub assets_dir: Option<PathBuf>,
}

impl ServerConfig {
    pub fn new(calibration: CalibrationSet) -> Self {
        Self {
            calibration: Arc::new(calibration),
            tts: TtsEngineDescriptor::formant_stub(),
            text_source: TextSourceDescriptor::echo(),
            assets_dir: None,
        }
    }
}

struct AppState {
    orchestrator: Arc<Orchestrator>,
    engine: Arc<dyn TtsEngine>,
    calibration: Arc<CalibrationSet>,
    text_source: TextSourceDescriptor,
    assets_dir: Option<PathBuf>,
}

/// A running server. Dropping it without calling [`ServerHandle::shutdown`]
/// leaves the server running until the runtime stops.
pub struct ServerHandle {
    local_addr: SocketAddr,
    orchestrator: Arc<Orchestrator>,
    shutdown: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<()>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn orchestrator(&self) -> &Arc<Orchestrator> {
        &self.orchestrator
    }

    pub async fn shutdown(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        let _ = (&mut self.task).await;
    }

    /// Runs until the server stops (e.g. forever, for the CLI).
    pub async fn wait(self) {
        let _ = self.task.await;
    }
}

/// Binds `addr` and serves `/agent`, `/embed.js` and `/demo`.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> Result<ServerHandle, WireError> {
    let engine: Arc<dyn TtsEngine> = engine_from_descriptor(&config.tts)
        .map_err(|e| WireError::Config(e.to_string()))?
        .into();
    config.text_source.validate().map_err(WireError::Config)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| WireError::BindFailure(format!("{addr}: {e}")))?;
    let local_addr = listener
        .local_addr()
        .map_err(|e| WireError::BindFailure(e.to_string()))?;
    let orchestrator = Arc::new(Orchestrator::new());
    let state = Arc::new(AppState {
        orchestrator: orchestrator.clone(),
        engine,
        calibration: config.calibration,
        text_source: config.text_source,
        assets_dir: config.assets_dir,
    });
    let app = Router::new()
        .route("/agent", get(agent_ws))
        .route("/embed.js", get(embed_js))
        .route("/demo", get(demo))
        .with_state(state);
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        let _ = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await;
    });
    Ok(ServerHandle {
        local_addr,
        orchestrator,
        shutdown: Some(tx),
        task,
    })
}

fn asset(state: &AppState, file: &str, builtin: &'static str) -> String {
    state
        .assets_dir
        .as_ref()
        .and_then(|d| std::fs::read_to_string(d.join(file)).ok())
        .unwrap_or_else(|| builtin.to_string())
}

async fn embed_js(State(state): State<Arc<AppState>>) -> Response {
    (
        [(
            header::CONTENT_TYPE,
            "application/javascript; charset=utf-8",
        )],
        asset(&state, "embed.js", EMBED_JS),
    )
        .into_response()
}

async fn demo(State(state): State<Arc<AppState>>) -> Html<String> {
    Html(asset(&state, "demo.html", DEMO_HTML))
}

async fn agent_ws(ws: WebSocketUpgrade, State(state): State<Arc<AppState>>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, state))
}

/// Serialized, seq-stamped delivery for one connection.
///
/// Sequence numbers are assigned under the same lock that enqueues the frame,
/// so frames leave in seq order even when several tasks emit concurrently.
#[derive(Clone)]
struct Outbox {
    tx: mpsc::UnboundedSender<String>,
    seq: Arc<Mutex<Sequencer>>,
}

impl Outbox {
    fn send(&self, event: &SessionEvent) {
        let mut seq = self.seq.lock().unwrap();
        let n = seq.next(&event.session_id, event.utterance_id);
        let _ = self.tx.send(encode_event(&WireEvent::new(event, n)));
    }

    fn send_error(&self, session_id: &str, utterance_id: u64, code: &str, message: impl ToString) {
        self.send(&SessionEvent {
            session_id: session_id.to_string(),
            utterance_id,
            event: AgentEvent::error(code, message),
        });
    }
}

struct Connection {
    state: Arc<AppState>,
    outbox: Outbox,
    text_source: Arc<dyn TextSource>,
    session_id: Option<String>,
}

async fn connection(socket: WebSocket, state: Arc<AppState>) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::unbounded_channel::<String>();
    let writer = tokio::spawn(async move {
        while let Some(text) = rx.recv().await {
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    let text_source: Arc<dyn TextSource> = match state.text_source.build() {
        Ok(s) => s.into(),
        Err(_) => Arc::new(crate::session::EchoSource),
    };
    let mut conn = Connection {
        state,
        outbox: Outbox {
            tx,
            seq: Arc::new(Mutex::new(Sequencer::default())),
        },
        text_source,
        session_id: None,
    };
    while let Some(Ok(msg)) = stream.next().await {
        let bytes: Vec<u8> = match msg {
            Message::Text(t) => t.as_bytes().to_vec(),
            Message::Binary(b) => b.to_vec(),
            Message::Close(_) => break,
            _ => continue,
        };
        match decode_command(&bytes) {
            Ok(cmd) => conn.dispatch(cmd),
            Err(e) => conn.error_event(e.code(), e),
        }
    }
    if let Some(id) = conn.session_id.take() {
        let _ = conn.state.orchestrator.close_session(&id);
        conn.state.orchestrator.remove_session(&id);
    }
    drop(conn);
    let _ = writer.await;
}

impl Connection {
    fn current_utterance(&self) -> (String, u64) {
        match &self.session_id {
            Some(id) => {
                let u = self
                    .state
                    .orchestrator
                    .session(id)
                    .map(|s| s.utterance_counter)
                    .unwrap_or(0);
                (id.clone(), u)
            }
            None => (String::new(), 0),
        }
    }

    fn error_event(&self, code: &str, message: impl ToString) {
        let (sid, uid) = self.current_utterance();
        self.outbox.send_error(&sid, uid, code, message);
    }

    fn session_error(&self, e: &SessionError) {
        self.error_event(e.code(), e);
    }

    fn require_session(&self) -> Option<String> {
        match &self.session_id {
            Some(id) => Some(id.clone()),
            None => {
                self.session_error(&SessionError::NoSession("opened on this connection".into()));
                None
            }
        }
    }

    fn dispatch(&mut self, cmd: ClientCommand) {
        let orch = self.state.orchestrator.clone();
        match cmd {
            ClientCommand::Open {
                avatar_id,
                persona_prompt,
            } => {
                if let Some(id) = &self.session_id {
                    let open = orch
                        .session(id)
                        .map(|s| s.state != SessionState::Closed)
                        .unwrap_or(false);
                    if open {
                        self.error_event(
                            "session_exists",
                            "this connection already has an open session",
                        );
                        return;
                    }
                    orch.remove_session(id);
                }
                let session = orch.open_session(&avatar_id, &persona_prompt);
                self.session_id = Some(session.session_id.clone());
                self.outbox.send(&SessionEvent {
                    session_id: session.session_id,
                    utterance_id: 0,
                    event: AgentEvent::AvatarSwitched { avatar_id },
                });
            }
            ClientCommand::SetExpression { name } => {
                let Some(id) = self.require_session() else {
                    return;
                };
                self.control(orch.set_expression(&id, &name));
            }
            ClientCommand::SetGesture { name } => {
                let Some(id) = self.require_session() else {
                    return;
                };
                self.control(orch.set_gesture(&id, &name));
            }
            ClientCommand::SwitchAvatar { avatar_id } => {
                let Some(id) = self.require_session() else {
                    return;
                };
                self.control(orch.switch_avatar(&id, &avatar_id));
            }
            ClientCommand::Close => {
                let Some(id) = self.require_session() else {
                    return;
                };
                if let Err(e) = orch.close_session(&id) {
                    self.session_error(&e);
                }
            }
            ClientCommand::SpeakText { text } => {
                let Some(id) = self.require_session() else {
                    return;
                };
                match orch.speak(
                    &id,
                    &text,
                    self.state.engine.clone(),
                    self.state.calibration.clone(),
                ) {
                    Ok(stream) => self.pump(stream),
                    Err(e) => self.session_error(&e),
                }
            }
            ClientCommand::SpeakAudio { wav_b64 } => {
                let Some(id) = self.require_session() else {
                    return;
                };
                let clip = base64::engine::general_purpose::STANDARD
                    .decode(wav_b64.as_bytes())
                    .map_err(|e| e.to_string())
                    .and_then(|bytes| decode_wav(&bytes).map_err(|e| e.to_string()));
                match clip {
                    Ok(clip) => match orch.speak_clip(&id, clip, self.state.calibration.clone()) {
                        Ok(stream) => self.pump(stream),
                        Err(e) => self.session_error(&e),
                    },
                    Err(msg) => self.error_event("bad_audio", msg),
                }
            }
            ClientCommand::UserTurn { text } => {
                let Some(id) = self.require_session() else {
                    return;
                };
                let source = self.text_source.clone();
                let engine = self.state.engine.clone();
                let cal = self.state.calibration.clone();
                let outbox = self.outbox.clone();
                tokio::task::spawn_blocking(move || {
                    let stream = orch
                        .user_turn(&id, &text, source.as_ref())
                        .and_then(|reply| orch.speak(&id, &reply, engine, cal));
                    match stream {
                        Ok(stream) => stream.for_each(|e| outbox.send(&e)),
                        Err(e) => {
                            let uid = orch.session(&id).map(|s| s.utterance_counter).unwrap_or(0);
                            outbox.send_error(&id, uid, e.code(), &e);
                        }
                    }
                });
            }
        }
    }

    fn control(&self, result: Result<SessionEvent, SessionError>) {
        match result {
            Ok(event) => self.outbox.send(&event),
            Err(e) => self.session_error(&e),
        }
    }

    /// Streams an utterance on a blocking worker so commands keep flowing.
    fn pump(&self, stream: UtteranceStream) {
        let outbox = self.outbox.clone();
        tokio::task::spawn_blocking(move || stream.for_each(|e| outbox.send(&e)));
    }
}
