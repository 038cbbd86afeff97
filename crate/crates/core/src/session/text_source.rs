use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{SessionError, Turn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextSourceKind {
    EchoStub,
    Scripted,
    HttpLlm,
}

impl std::str::FromStr for TextSourceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "echo_stub" => Ok(TextSourceKind::EchoStub),
            "scripted" => Ok(TextSourceKind::Scripted),
            "http_llm" => Ok(TextSourceKind::HttpLlm),
            other => Err(format!(
                "unknown text source {other:?} (expected echo_stub, scripted or http_llm)"
            )),
        }
    }
}

/// Everything a text source sees for one turn.
#[derive(Debug, Clone, Serialize)]
pub struct TurnContext<'a> {
    pub persona_prompt: &'a str,
    pub history: &'a [Turn],
    pub user_text: &'a str,
}

/// Produces the agent's reply to a user turn.
pub trait TextSource: Send + Sync {
    fn reply(&self, ctx: &TurnContext<'_>) -> Result<String, SessionError>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct EchoSource;

impl TextSource for EchoSource {
    fn reply(&self, ctx: &TurnContext<'_>) -> Result<String, SessionError> {
        Ok(format!("ECHO: {}", ctx.user_text))
    }
}

/// Pops canned replies in order.
#[derive(Debug, Default)]
pub struct ScriptedSource {
    replies: Mutex<VecDeque<String>>,
}

impl ScriptedSource {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            replies: Mutex::new(replies.into_iter().map(Into::into).collect()),
        }
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().unwrap().len()
    }
}

impl TextSource for ScriptedSource {
    fn reply(&self, _ctx: &TurnContext<'_>) -> Result<String, SessionError> {
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .ok_or(SessionError::ScriptExhausted)
    }
}

#[derive(Deserialize)]
struct LlmReply {
    reply: String,
}

/// POSTs `{persona_prompt, history, user_text}` as JSON.
///
/// The response is either `{"reply": "..."}` or a plain-text body.
#[derive(Debug, Clone)]
pub struct HttpLlmSource {
    endpoint: String,
    token: Option<String>,
    timeout: Duration,
}

impl HttpLlmSource {
    pub fn new(endpoint: impl Into<String>, token: Option<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into(),
            token,
            timeout,
        }
    }
}

impl TextSource for HttpLlmSource {
    fn reply(&self, ctx: &TurnContext<'_>) -> Result<String, SessionError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut req = agent.post(&self.endpoint);
        if let Some(token) = &self.token {
            req = req.header("authorization", format!("Bearer {token}"));
        }
        let mut resp = req
            .send_json(ctx)
            .map_err(|e| SessionError::ServiceUnreachable(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(SessionError::ServiceUnreachable(format!(
                "HTTP status {}",
                resp.status()
            )));
        }
        let body = resp
            .body_mut()
            .with_config()
            .limit(1 << 20)
            .read_to_string()
            .map_err(|e| SessionError::ServiceUnreachable(e.to_string()))?;
        Ok(match serde_json::from_str::<LlmReply>(&body) {
            Ok(r) => r.reply,
            Err(_) => body.trim().to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextSourceDescriptor {
    pub kind: TextSourceKind,
    pub script: Option<Vec<String>>,
    pub endpoint: Option<String>,
    pub credentials: Option<String>,
}

impl TextSourceDescriptor {
    pub fn echo() -> Self {
        Self {
            kind: TextSourceKind::EchoStub,
            script: None,
            endpoint: None,
            credentials: None,
        }
    }

    pub fn scripted<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        Self {
            kind: TextSourceKind::Scripted,
            script: Some(replies.into_iter().map(Into::into).collect()),
            ..Self::echo()
        }
    }

    pub fn http_llm(endpoint: impl Into<String>, credentials: Option<String>) -> Self {
        Self {
            kind: TextSourceKind::HttpLlm,
            endpoint: Some(endpoint.into()),
            credentials,
            script: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if (self.kind == TextSourceKind::Scripted) != self.script.is_some() {
            return Err("a script is required for, and only for, the scripted text source".into());
        }
        if self.kind == TextSourceKind::HttpLlm && self.endpoint.is_none() {
            return Err("http_llm requires an endpoint".into());
        }
        Ok(())
    }

    /// Fresh source instance; scripted sources get their own reply queue.
    pub fn build(&self) -> Result<Box<dyn TextSource>, String> {
        self.validate()?;
        Ok(match self.kind {
            TextSourceKind::EchoStub => Box::new(EchoSource),
            TextSourceKind::Scripted => {
                Box::new(ScriptedSource::new(self.script.clone().unwrap_or_default()))
            }
            TextSourceKind::HttpLlm => Box::new(HttpLlmSource::new(
                self.endpoint.clone().unwrap_or_default(),
                self.credentials.clone(),
                crate::tts::DEFAULT_HTTP_TIMEOUT,
            )),
        })
    }
}
