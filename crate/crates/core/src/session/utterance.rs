use std::collections::VecDeque;
use std::sync::Arc;
use std::time::Instant;

use super::{AgentEvent, LatencyReport, SessionCell, SessionEvent};
use crate::audio::{AudioClip, MfccExtractor, CANONICAL_RATE_HZ};
use crate::tts::{TtsEngine, TtsRequest};
use crate::viseme::{CalibrationSet, LipSyncStream, VisemeFrame, VisemeTimeline};

/// PCM carried by one `AudioChunk` event.
pub const AUDIO_CHUNK_SECONDS: f64 = 0.1;

const CHUNK_SAMPLES: usize = (CANONICAL_RATE_HZ as usize) / 10;

/// A finished utterance: the audio, its viseme timeline and the timing marks.
#[derive(Debug, Clone)]
pub struct Utterance {
    pub utterance_id: u64,
    pub text: String,
    pub clip: AudioClip,
    pub timeline: VisemeTimeline,
    pub t_request: Instant,
    pub t_first_event: Instant,
    pub report: LatencyReport,
    pub aborted: bool,
}

enum Source {
    Tts { engine: Arc<dyn TtsEngine> },
    Clip(AudioClip),
}

struct Running {
    clip: AudioClip,
    pcm: Vec<i16>,
    lipsync: LipSyncStream,
    lookahead: Option<VisemeFrame>,
    next_chunk: usize,
    frames: Vec<VisemeFrame>,
}

enum Phase {
    Pending(Source),
    Running(Box<Running>),
    Ended,
}

/// Lazily runs one utterance and yields its events in emission order.
///
/// TTS runs on the first call to `next`. Dropping the stream early returns
/// the session to idle.
pub struct UtteranceStream {
    cell: Arc<SessionCell>,
    session_id: String,
    utterance_id: u64,
    text: String,
    cal: Arc<CalibrationSet>,
    extractor: Arc<MfccExtractor>,
    engine_kind: String,
    phase: Phase,
    queue: VecDeque<AgentEvent>,
    t_request: Instant,
    t_first_event: Option<Instant>,
    summary: Option<Utterance>,
    released: bool,
}

impl UtteranceStream {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_tts(
        cell: Arc<SessionCell>,
        session_id: String,
        utterance_id: u64,
        text: String,
        engine: Arc<dyn TtsEngine>,
        cal: Arc<CalibrationSet>,
        extractor: Arc<MfccExtractor>,
        t_request: Instant,
    ) -> Self {
        let engine_kind = engine.kind().to_string();
        Self::build(
            cell,
            session_id,
            utterance_id,
            text,
            Source::Tts { engine },
            engine_kind,
            cal,
            extractor,
            t_request,
        )
    }

    pub(crate) fn from_clip(
        cell: Arc<SessionCell>,
        session_id: String,
        utterance_id: u64,
        clip: AudioClip,
        cal: Arc<CalibrationSet>,
        extractor: Arc<MfccExtractor>,
        t_request: Instant,
    ) -> Self {
        Self::build(
            cell,
            session_id,
            utterance_id,
            String::new(),
            Source::Clip(clip),
            "client_audio".to_string(),
            cal,
            extractor,
            t_request,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        cell: Arc<SessionCell>,
        session_id: String,
        utterance_id: u64,
        text: String,
        source: Source,
        engine_kind: String,
        cal: Arc<CalibrationSet>,
        extractor: Arc<MfccExtractor>,
        t_request: Instant,
    ) -> Self {
        Self {
            cell,
            session_id,
            utterance_id,
            text,
            cal,
            extractor,
            engine_kind,
            phase: Phase::Pending(source),
            queue: VecDeque::new(),
            t_request,
            t_first_event: None,
            summary: None,
            released: false,
        }
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn utterance_id(&self) -> u64 {
        self.utterance_id
    }

    /// Drains the stream, returning every remaining event and the utterance
    /// summary (absent when TTS failed).
    pub fn finish(mut self) -> (Vec<SessionEvent>, Option<Utterance>) {
        let events: Vec<SessionEvent> = self.by_ref().collect();
        (events, self.summary.take())
    }

    fn latency(&self) -> f64 {
        self.t_first_event
            .map(|t| t.duration_since(self.t_request).as_secs_f64())
            .unwrap_or(0.0)
    }

    fn mark_first_event(&mut self) {
        if self.t_first_event.is_none() {
            self.t_first_event = Some(Instant::now());
        }
    }

    fn start(&mut self, source: Source) {
        let clip = match source {
            Source::Clip(clip) => Ok(clip),
            Source::Tts { engine } => engine.synthesize(&TtsRequest::new(self.text.clone())),
        };
        let clip = match clip {
            Ok(c) => c.to_canonical_rate().into_owned(),
            Err(e) => {
                self.mark_first_event();
                self.queue.push_back(AgentEvent::from_tts_error(&e));
                self.queue.push_back(AgentEvent::UtteranceEnd {
                    report: LatencyReport {
                        first_event_latency_seconds: self.latency(),
                        audio_duration_seconds: 0.0,
                        engine_kind: self.engine_kind.clone(),
                    },
                    aborted: false,
                });
                self.phase = Phase::Ended;
                return;
            }
        };
        let mut lipsync = LipSyncStream::new(&clip, self.cal.clone(), self.extractor.clone());
        let lookahead = lipsync.next();
        self.mark_first_event();
        self.queue.push_back(AgentEvent::UtteranceStart {
            text: self.text.clone(),
        });
        self.phase = Phase::Running(Box::new(Running {
            pcm: clip.to_pcm16(),
            clip,
            lipsync,
            lookahead,
            next_chunk: 0,
            frames: Vec::new(),
        }));
    }

    /// Queues the next audio chunk and the viseme frames inside it.
    fn advance(&mut self) {
        let Phase::Running(run) = &mut self.phase else {
            return;
        };
        let begin = run.next_chunk * CHUNK_SAMPLES;
        if begin < run.pcm.len() {
            let end = (begin + CHUNK_SAMPLES).min(run.pcm.len());
            let is_last = end == run.pcm.len();
            run.next_chunk += 1;
            self.queue.push_back(AgentEvent::AudioChunk {
                t_start: begin as f64 / CANONICAL_RATE_HZ as f64,
                sample_rate_hz: CANONICAL_RATE_HZ,
                pcm: run.pcm[begin..end].to_vec(),
            });
            let t_end = end as f64 / CANONICAL_RATE_HZ as f64;
            while let Some(frame) = run.lookahead.take() {
                if !is_last && frame.t_seconds >= t_end {
                    run.lookahead = Some(frame);
                    break;
                }
                run.frames.push(frame);
                self.queue.push_back(AgentEvent::Viseme(frame));
                run.lookahead = run.lipsync.next();
            }
            return;
        }
        // Empty clips and the tail: flush anything left, then end.
        while let Some(frame) = run.lookahead.take() {
            run.frames.push(frame);
            self.queue.push_back(AgentEvent::Viseme(frame));
            run.lookahead = run.lipsync.next();
        }
        self.end(false);
    }

    fn end(&mut self, aborted: bool) {
        let phase = std::mem::replace(&mut self.phase, Phase::Ended);
        let (duration, run) = match phase {
            Phase::Running(run) => (run.clip.duration_seconds(), Some(run)),
            _ => (0.0, None),
        };
        let report = LatencyReport {
            first_event_latency_seconds: self.latency(),
            audio_duration_seconds: duration,
            engine_kind: self.engine_kind.clone(),
        };
        if let (Some(run), Some(t_first_event)) = (run, self.t_first_event) {
            let Running {
                clip,
                frames,
                lipsync,
                ..
            } = *run;
            self.summary = Some(Utterance {
                utterance_id: self.utterance_id,
                text: self.text.clone(),
                timeline: VisemeTimeline {
                    audio_duration_seconds: clip.duration_seconds(),
                    hop_seconds: lipsync.hop_seconds(),
                    frames,
                },
                clip,
                t_request: self.t_request,
                t_first_event,
                report: report.clone(),
                aborted,
            });
        }
        self.queue
            .push_back(AgentEvent::UtteranceEnd { report, aborted });
    }

    fn release(&mut self) {
        if !self.released {
            self.released = true;
            self.cell.finish_speaking();
        }
    }

    fn wrap(&self, event: AgentEvent) -> SessionEvent {
        SessionEvent {
            session_id: self.session_id.clone(),
            utterance_id: self.utterance_id,
            event,
        }
    }
}

impl Iterator for UtteranceStream {
    type Item = SessionEvent;

    fn next(&mut self) -> Option<SessionEvent> {
        loop {
            if !matches!(self.phase, Phase::Ended) && self.cell.aborted() {
                self.queue.clear();
                self.end(true);
            }
            if let Some(event) = self.queue.pop_front() {
                if matches!(event, AgentEvent::UtteranceEnd { .. }) {
                    self.queue.clear();
                    self.release();
                }
                return Some(self.wrap(event));
            }
            match std::mem::replace(&mut self.phase, Phase::Ended) {
                Phase::Ended => {
                    self.release();
                    return None;
                }
                Phase::Pending(source) => self.start(source),
                running @ Phase::Running(_) => {
                    self.phase = running;
                    self.advance();
                }
            }
        }
    }
}

impl Drop for UtteranceStream {
    fn drop(&mut self) {
        self.release();
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::session::{Orchestrator, SessionError, SessionState};
    use crate::tts::{synthesize_vowels, FormantStub, TtsError};
    use crate::viseme::{calibrate, Viseme, DEFAULT_SILENCE_RMS_THRESHOLD};

    fn cal() -> Arc<CalibrationSet> {
        let clips: BTreeMap<Viseme, AudioClip> = Viseme::VOWELS
            .iter()
            .map(|&v| (v, synthesize_vowels(&[(v, 0.5)])))
            .collect();
        Arc::new(calibrate(&clips, DEFAULT_SILENCE_RMS_THRESHOLD).unwrap())
    }

    fn kinds(events: &[SessionEvent]) -> Vec<&'static str> {
        events
            .iter()
            .map(|e| match e.event {
                AgentEvent::UtteranceStart { .. } => "start",
                AgentEvent::AudioChunk { .. } => "chunk",
                AgentEvent::Viseme(_) => "viseme",
                AgentEvent::UtteranceEnd { .. } => "end",
                AgentEvent::Error { .. } => "error",
                _ => "other",
            })
            .collect()
    }

    #[test]
    fn single_vowel_event_counts() {
        let orch = Orchestrator::new();
        let s = orch.open_session("av", "");
        let stream = orch
            .speak(&s.session_id, "a", Arc::new(FormantStub), cal())
            .unwrap();
        assert_eq!(
            orch.session(&s.session_id).unwrap().state,
            SessionState::Speaking
        );
        let (events, utt) = stream.finish();
        let k = kinds(&events);
        assert_eq!(k.first(), Some(&"start"));
        assert_eq!(k.last(), Some(&"end"));
        // 4000 samples: chunks of 1600, 1600, 800; ceil(4000 / 160) frames
        assert_eq!(k.iter().filter(|&&x| x == "chunk").count(), 3);
        assert_eq!(k.iter().filter(|&&x| x == "viseme").count(), 25);
        let utt = utt.unwrap();
        assert_eq!(utt.utterance_id, 1);
        assert!(utt.t_first_event >= utt.t_request);
        assert!((utt.timeline.audio_duration_seconds - 0.25).abs() < 1e-12);
        assert_eq!(
            orch.session(&s.session_id).unwrap().state,
            SessionState::Idle
        );
    }

    #[test]
    fn busy_while_streaming_and_ids_increase() {
        let orch = Orchestrator::new();
        let s = orch.open_session("av", "");
        let cal = cal();
        let stream = orch
            .speak(&s.session_id, "a", Arc::new(FormantStub), cal.clone())
            .unwrap();
        assert!(matches!(
            orch.speak(&s.session_id, "e", Arc::new(FormantStub), cal.clone()),
            Err(SessionError::SessionBusy)
        ));
        assert!(matches!(
            orch.user_turn(&s.session_id, "hi", &crate::session::EchoSource),
            Err(SessionError::SessionBusy)
        ));
        drop(stream);
        let next = orch
            .speak(&s.session_id, "e", Arc::new(FormantStub), cal)
            .unwrap();
        assert_eq!(next.utterance_id(), 2);
    }

    #[test]
    fn empty_text_is_an_error_event() {
        let orch = Orchestrator::new();
        let s = orch.open_session("av", "");
        let (events, utt) = orch
            .speak(&s.session_id, "  ", Arc::new(FormantStub), cal())
            .unwrap()
            .finish();
        assert_eq!(kinds(&events), ["error", "end"]);
        match &events[0].event {
            AgentEvent::Error { code, .. } => assert_eq!(code, TtsError::EmptyText.code()),
            other => panic!("{other:?}"),
        }
        assert!(utt.is_none());
        assert_eq!(
            orch.session(&s.session_id).unwrap().state,
            SessionState::Idle
        );
    }

    #[test]
    fn close_mid_stream_aborts() {
        let orch = Orchestrator::new();
        let s = orch.open_session("av", "");
        let mut stream = orch
            .speak(&s.session_id, "aeiou", Arc::new(FormantStub), cal())
            .unwrap();
        let first: Vec<_> = stream.by_ref().take(3).collect();
        assert_eq!(kinds(&first)[0], "start");
        orch.close_session(&s.session_id).unwrap();
        let rest: Vec<_> = stream.collect();
        assert_eq!(rest.len(), 1);
        assert!(matches!(
            rest[0].event,
            AgentEvent::UtteranceEnd { aborted: true, .. }
        ));
        assert_eq!(
            orch.session(&s.session_id).unwrap().state,
            SessionState::Closed
        );
    }

    #[test]
    fn chunks_precede_their_visemes() {
        let orch = Orchestrator::new();
        let s = orch.open_session("av", "");
        let (events, _) = orch
            .speak(&s.session_id, "hello there", Arc::new(FormantStub), cal())
            .unwrap()
            .finish();
        let mut covered = 0.0;
        let mut last_t = f64::NEG_INFINITY;
        for e in &events {
            match &e.event {
                AgentEvent::AudioChunk {
                    t_start,
                    pcm,
                    sample_rate_hz,
                } => {
                    assert!(pcm.len() <= CHUNK_SAMPLES);
                    covered = t_start + pcm.len() as f64 / *sample_rate_hz as f64;
                }
                AgentEvent::Viseme(f) => {
                    assert!(f.t_seconds < covered);
                    assert!(f.t_seconds > last_t);
                    last_t = f.t_seconds;
                }
                _ => {}
            }
        }
    }
}
