use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use super::formant::{synthesize_vowels, text_to_vowel_sequence};
use super::{EngineKind, TtsEngine, TtsEngineDescriptor, TtsError, TtsRequest};
use crate::audio::{decode_wav, read_wav_file, resample, AudioClip, WavError};

pub const DEFAULT_HTTP_TIMEOUT: Duration = Duration::from_secs(10);
pub const DEFAULT_HTTP_CONCURRENCY: usize = 4;

/// Response bodies beyond this are rejected.
const MAX_WAV_BYTES: u64 = 64 * 1024 * 1024;

fn to_rate(clip: AudioClip, rate: u32) -> AudioClip {
    if clip.sample_rate_hz() == rate {
        clip
    } else {
        resample(&clip, rate)
    }
}

/// Fixture file stem: SHA-256 of the trimmed UTF-8 text, lowercase hex.
pub fn fixture_key(text: &str) -> String {
    Sha256::digest(text.trim().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Default, Clone, Copy)]
pub struct FormantStub;

impl TtsEngine for FormantStub {
    fn kind(&self) -> EngineKind {
        EngineKind::FormantStub
    }

    fn synthesize(&self, req: &TtsRequest) -> Result<AudioClip, TtsError> {
        let text = req.trimmed_text()?;
        let clip = synthesize_vowels(&text_to_vowel_sequence(text));
        Ok(to_rate(clip, req.target_rate_hz))
    }
}

#[derive(Debug, Clone)]
pub struct FixtureDirEngine {
    dir: PathBuf,
}

impl FixtureDirEngine {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, text: &str) -> PathBuf {
        self.dir.join(format!("{}.wav", fixture_key(text)))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl TtsEngine for FixtureDirEngine {
    fn kind(&self) -> EngineKind {
        EngineKind::FixtureDir
    }

    fn synthesize(&self, req: &TtsRequest) -> Result<AudioClip, TtsError> {
        let path = self.path_for(req.trimmed_text()?);
        match read_wav_file(&path) {
            Ok(clip) => Ok(to_rate(clip, req.target_rate_hz)),
            Err(WavError::Io(e)) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(TtsError::FixtureMissing(path))
            }
            Err(e) => Err(TtsError::FixtureUnreadable(e)),
        }
    }
}

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
struct Limiter {
    in_flight: Mutex<usize>,
    freed: Condvar,
    max: usize,
}

struct Permit<'a>(&'a Limiter);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.in_flight.lock().unwrap() -= 1;
        self.0.freed.notify_one();
    }
}

impl Limiter {
    fn new(max: usize) -> Self {
        Self {
            in_flight: Mutex::new(0),
            freed: Condvar::new(),
            max: max.max(1),
        }
    }

    fn acquire(&self, deadline: Instant) -> Option<Permit<'_>> {
        let mut n = self.in_flight.lock().unwrap();
        while *n >= self.max {
            let now = Instant::now();
            if now >= deadline {
                return None;
            }
            n = self.freed.wait_timeout(n, deadline - now).unwrap().0;
        }
        *n += 1;
        Some(Permit(self))
    }
}

/// Single-POST TTS client: `text/plain` body in, `audio/wav` body out.
#[derive(Debug)]
pub struct HttpTtsEngine {
    endpoint: String,
    token: Option<String>,
    timeout: Duration,
    limiter: Limiter,
}

impl HttpTtsEngine {
    pub fn new(endpoint: impl Into<String>, token: Option<String>) -> Self {
        Self::with_limits(
            endpoint,
            token,
            DEFAULT_HTTP_TIMEOUT,
            DEFAULT_HTTP_CONCURRENCY,
        )
    }

    pub fn with_limits(
        endpoint: impl Into<String>,
        token: Option<String>,
        timeout: Duration,
        max_concurrent: usize,
    ) -> Self {
        Self {
            endpoint: endpoint.into(),
            token,
            timeout,
            limiter: Limiter::new(max_concurrent),
        }
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }
}

impl TtsEngine for HttpTtsEngine {
    fn kind(&self) -> EngineKind {
        EngineKind::HttpService
    }

    fn synthesize(&self, req: &TtsRequest) -> Result<AudioClip, TtsError> {
        let text = req.trimmed_text()?;
        let deadline = Instant::now() + self.timeout;
        let _permit = self.limiter.acquire(deadline).ok_or_else(|| {
            TtsError::ServiceUnreachable("timed out waiting for a request slot".into())
        })?;
        let remaining = deadline.saturating_duration_since(Instant::now());

        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(remaining))
            .http_status_as_error(false)
            .build()
            .into();
        let mut request = agent
            .post(&self.endpoint)
            .header("content-type", "text/plain; charset=utf-8")
            .header("accept", "audio/wav");
        if let Some(token) = &self.token {
            request = request.header("authorization", format!("Bearer {token}"));
        }
        let mut response = request
            .send(text)
            .map_err(|e| TtsError::ServiceUnreachable(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(TtsError::ServiceUnreachable(format!(
                "HTTP status {status}"
            )));
        }
        let bytes = response
            .body_mut()
            .with_config()
            .limit(MAX_WAV_BYTES)
            .read_to_vec()
            .map_err(|e| TtsError::ServiceUnreachable(e.to_string()))?;
        let clip =
            decode_wav(&bytes).map_err(|e| TtsError::ServiceReturnedNonWav(e.to_string()))?;
        Ok(to_rate(clip, req.target_rate_hz))
    }
}

/// Validates the descriptor and builds the matching engine.
pub fn engine_from_descriptor(desc: &TtsEngineDescriptor) -> Result<Box<dyn TtsEngine>, TtsError> {
    desc.validate()?;
    Ok(match desc.kind {
        EngineKind::FormantStub => Box::new(FormantStub),
        EngineKind::FixtureDir => Box::new(FixtureDirEngine::new(
            desc.fixture_path.clone().expect("validated"),
        )),
        EngineKind::HttpService => Box::new(HttpTtsEngine::new(
            desc.endpoint.clone().expect("validated"),
            desc.credentials.clone(),
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::write_wav_file;
    use std::sync::Arc;

    #[test]
    fn stub_durations() {
        let clip = FormantStub.synthesize(&TtsRequest::new("a")).unwrap();
        assert_eq!(clip.len(), 4000);
        assert_eq!(clip.sample_rate_hz(), 16_000);
        assert!(matches!(
            FormantStub.synthesize(&TtsRequest::new("   ")),
            Err(TtsError::EmptyText)
        ));
    }

    #[test]
    fn stub_honours_target_rate() {
        let mut req = TtsRequest::new("a");
        req.target_rate_hz = 8000;
        let clip = FormantStub.synthesize(&req).unwrap();
        assert_eq!(clip.len(), 2000);
        assert_eq!(clip.sample_rate_hz(), 8000);
    }

    #[test]
    fn fixture_key_is_stable_hex() {
        // sha256("hello")
        assert_eq!(
            fixture_key("  hello\n"),
            "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
        );
    }

    #[test]
    fn fixture_dir_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let engine = FixtureDirEngine::new(dir.path());
        let req = TtsRequest::new("hello there");
        assert!(matches!(
            engine.synthesize(&req),
            Err(TtsError::FixtureMissing(_))
        ));

        let clip = AudioClip::new(vec![0.5; 160], 16_000);
        write_wav_file(engine.path_for("hello there"), &clip).unwrap();
        let got = engine.synthesize(&req).unwrap();
        assert_eq!(got.len(), 160);

        std::fs::write(engine.path_for("broken"), b"not a wav").unwrap();
        assert!(matches!(
            engine.synthesize(&TtsRequest::new("broken")),
            Err(TtsError::FixtureUnreadable(_))
        ));
    }

    #[test]
    fn descriptor_builds_engines() {
        assert_eq!(
            engine_from_descriptor(&TtsEngineDescriptor::formant_stub())
                .unwrap()
                .kind(),
            EngineKind::FormantStub
        );
        assert_eq!(
            engine_from_descriptor(&TtsEngineDescriptor::http_service(
                "http://127.0.0.1:1/",
                None
            ))
            .unwrap()
            .kind(),
            EngineKind::HttpService
        );
        let mut bad = TtsEngineDescriptor::formant_stub();
        bad.fixture_path = Some("x".into());
        assert!(engine_from_descriptor(&bad).is_err());
    }

    #[test]
    fn limiter_bounds_concurrency() {
        let limiter = Arc::new(Limiter::new(2));
        let deadline = Instant::now() + Duration::from_millis(50);
        let a = limiter.acquire(deadline).unwrap();
        let _b = limiter.acquire(deadline).unwrap();
        assert!(limiter.acquire(deadline).is_none());
        drop(a);
        assert!(limiter
            .acquire(Instant::now() + Duration::from_millis(50))
            .is_some());
    }

    #[test]
    fn unreachable_service() {
        // port 9 (discard) on localhost is closed in the sandbox
        let engine =
            HttpTtsEngine::with_limits("http://127.0.0.1:9/tts", None, Duration::from_secs(2), 1);
        assert!(matches!(
            engine.synthesize(&TtsRequest::new("a")),
            Err(TtsError::ServiceUnreachable(_))
        ));
    }
}
