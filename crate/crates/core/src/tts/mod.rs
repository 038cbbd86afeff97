//! Text to [`AudioClip`] behind one pluggable interface.
//!
//! Three engines are provided:
//!
//! - `formant_stub`: deterministic two-formant vowel synthesis, used by tests
//!   and demos because it gives the lip-sync path a known ground truth.
//! - `fixture_dir`: loads `<sha256(trimmed text) as lowercase hex>.wav` from a
//!   directory.
//! - `http_service`: POSTs the text as `text/plain` and decodes the WAV bytes
//!   in the response. Vendor-specific adapters can sit behind that endpoint.

mod engines;
mod formant;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::audio::{AudioClip, WavError, CANONICAL_RATE_HZ};

pub use engines::{
    engine_from_descriptor, fixture_key, FixtureDirEngine, FormantStub, HttpTtsEngine,
    DEFAULT_HTTP_CONCURRENCY, DEFAULT_HTTP_TIMEOUT,
};
pub use formant::{
    formant_calibration, formant_pair, synthesize_vowels, text_to_vowel_sequence,
    CALIBRATION_SECONDS, CROSSFADE_SECONDS, FORMANT_AMPLITUDE, NON_VOWEL_SECONDS, VOWEL_SECONDS,
};

pub const ENV_TTS_ENDPOINT: &str = "VTUTOR_TTS_ENDPOINT";
pub const ENV_TTS_TOKEN: &str = "VTUTOR_TTS_TOKEN";

#[derive(Debug, thiserror::Error)]
pub enum TtsError {
    #[error("text is empty")]
    EmptyText,
    #[error("no fixture audio at {0}")]
    FixtureMissing(PathBuf),
    #[error("TTS service unreachable: {0}")]
    ServiceUnreachable(String),
    #[error("TTS service returned non-WAV audio: {0}")]
    ServiceReturnedNonWav(String),
    #[error("invalid engine descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("fixture audio unreadable: {0}")]
    FixtureUnreadable(#[source] WavError),
}

impl TtsError {
    /// Stable snake_case code used in wire error events.
    pub fn code(&self) -> &'static str {
        match self {
            TtsError::EmptyText => "empty_text",
            TtsError::FixtureMissing(_) => "fixture_missing",
            TtsError::ServiceUnreachable(_) => "service_unreachable",
            TtsError::ServiceReturnedNonWav(_) => "service_returned_non_wav",
            TtsError::InvalidDescriptor(_) => "invalid_descriptor",
            TtsError::FixtureUnreadable(_) => "fixture_unreadable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TtsRequest {
    pub text: String,
    pub voice_id: String,
    pub target_rate_hz: u32,
}

impl TtsRequest {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            voice_id: "default".to_string(),
            target_rate_hz: CANONICAL_RATE_HZ,
        }
    }

    /// Text with surrounding whitespace removed, or `EmptyText`.
    pub fn trimmed_text(&self) -> Result<&str, TtsError> {
        let t = self.text.trim();
        if t.is_empty() {
            Err(TtsError::EmptyText)
        } else {
            Ok(t)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    FormantStub,
    FixtureDir,
    HttpService,
}

impl EngineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::FormantStub => "formant_stub",
            EngineKind::FixtureDir => "fixture_dir",
            EngineKind::HttpService => "http_service",
        }
    }
}

impl std::str::FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "formant_stub" => Ok(EngineKind::FormantStub),
            "fixture_dir" => Ok(EngineKind::FixtureDir),
            "http_service" => Ok(EngineKind::HttpService),
            other => Err(format!(
                "unknown TTS engine {other:?} (expected formant_stub, fixture_dir or http_service)"
            )),
        }
    }
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TtsEngineDescriptor {
    pub kind: EngineKind,
    pub endpoint: Option<String>,
    /// Bearer token sent to the HTTP service.
    pub credentials: Option<String>,
    pub fixture_path: Option<PathBuf>,
}

impl TtsEngineDescriptor {
    pub fn formant_stub() -> Self {
        Self {
            kind: EngineKind::FormantStub,
            endpoint: None,
            credentials: None,
            fixture_path: None,
        }
    }

    pub fn fixture_dir(path: impl Into<PathBuf>) -> Self {
        Self {
            kind: EngineKind::FixtureDir,
            fixture_path: Some(path.into()),
            ..Self::formant_stub()
        }
    }

    pub fn http_service(endpoint: impl Into<String>, credentials: Option<String>) -> Self {
        Self {
            kind: EngineKind::HttpService,
            endpoint: Some(endpoint.into()),
            credentials,
            fixture_path: None,
        }
    }

    /// Applies `VTUTOR_TTS_ENDPOINT` / `VTUTOR_TTS_TOKEN` when set.
    pub fn with_env_overrides(self) -> Self {
        self.with_overrides(
            std::env::var(ENV_TTS_ENDPOINT).ok(),
            std::env::var(ENV_TTS_TOKEN).ok(),
        )
    }

    pub fn with_overrides(mut self, endpoint: Option<String>, token: Option<String>) -> Self {
        if let Some(e) = endpoint.filter(|e| !e.is_empty()) {
            self.endpoint = Some(e);
        }
        if let Some(t) = token.filter(|t| !t.is_empty()) {
            self.credentials = Some(t);
        }
        self
    }

    /// Endpoint present iff http_service; fixture path present iff fixture_dir.
    pub fn validate(&self) -> Result<(), TtsError> {
        let wants_endpoint = self.kind == EngineKind::HttpService;
        let wants_fixture = self.kind == EngineKind::FixtureDir;
        if wants_endpoint != self.endpoint.is_some() {
            return Err(TtsError::InvalidDescriptor(if wants_endpoint {
                "http_service requires an endpoint".into()
            } else {
                format!("{} does not take an endpoint", self.kind)
            }));
        }
        if wants_fixture != self.fixture_path.is_some() {
            return Err(TtsError::InvalidDescriptor(if wants_fixture {
                "fixture_dir requires a fixture path".into()
            } else {
                format!("{} does not take a fixture path", self.kind)
            }));
        }
        Ok(())
    }
}

/// A text-to-speech backend. Engines hold no per-request state.
pub trait TtsEngine: Send + Sync {
    fn kind(&self) -> EngineKind;

    fn synthesize(&self, req: &TtsRequest) -> Result<AudioClip, TtsError>;
}

/// One-shot convenience: build the engine from `engine` and run `req`.
pub fn synthesize(req: &TtsRequest, engine: &TtsEngineDescriptor) -> Result<AudioClip, TtsError> {
    engine_from_descriptor(engine)?.synthesize(req)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_invariants() {
        assert!(TtsEngineDescriptor::formant_stub().validate().is_ok());
        assert!(TtsEngineDescriptor::fixture_dir("/tmp").validate().is_ok());
        assert!(TtsEngineDescriptor::http_service("http://x", None)
            .validate()
            .is_ok());

        let mut d = TtsEngineDescriptor::formant_stub();
        d.endpoint = Some("http://x".into());
        assert!(d.validate().is_err());
        let mut d = TtsEngineDescriptor::http_service("http://x", None);
        d.endpoint = None;
        assert!(d.validate().is_err());
        let mut d = TtsEngineDescriptor::fixture_dir("/tmp");
        d.fixture_path = None;
        assert!(d.validate().is_err());
    }

    #[test]
    fn overrides_replace_fields() {
        let d = TtsEngineDescriptor::http_service("http://a", None)
            .with_overrides(Some("http://b".into()), Some("tok".into()));
        assert_eq!(d.endpoint.as_deref(), Some("http://b"));
        assert_eq!(d.credentials.as_deref(), Some("tok"));
        let d = d.with_overrides(Some(String::new()), None);
        assert_eq!(d.endpoint.as_deref(), Some("http://b"));
    }

    #[test]
    fn kinds_parse() {
        for k in [
            EngineKind::FormantStub,
            EngineKind::FixtureDir,
            EngineKind::HttpService,
        ] {
            assert_eq!(k.as_str().parse::<EngineKind>().unwrap(), k);
        }
        assert!("azure".parse::<EngineKind>().is_err());
    }

    #[test]
    fn blank_text_is_empty() {
        assert!(matches!(
            TtsRequest::new("  \n").trimmed_text(),
            Err(TtsError::EmptyText)
        ));
        assert_eq!(TtsRequest::new(" hi ").trimmed_text().unwrap(), "hi");
    }
}
