//! Transports: HTTP chat-completion and the deterministic mock.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::path::Path;
use std::sync::Mutex;

use super::template::RequestPayload;
use super::{GatewayError, ModelEndpoint};

/// Routing key for canned replies: the request kind (a template slug,
/// `answer`, or `diagnostic`) plus the video id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RequestKey {
    pub kind: String,
    pub video_id: String,
}

pub trait Transport: Send + Sync {
    fn send(&self, key: &RequestKey, payload: &RequestPayload) -> Result<String, GatewayError>;
}

/// On-disk mock fixture: an ordered list of canned replies keyed by
/// (kind, video_id). Replies for the same key are consumed in order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockFixture {
    pub replies: Vec<MockReply>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MockReply {
    pub kind: String,
    pub video_id: String,
    pub reply: String,
}

impl MockFixture {
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path).map_err(|e| GatewayError::Transport {
            detail: format!("mock fixture {}: {e}", path.display()),
        })?;
        serde_json::from_str(&text).map_err(|e| GatewayError::Transport {
            detail: format!("mock fixture {}: {e}", path.display()),
        })
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("fixture serializes"))
    }

    pub fn push(&mut self, kind: &str, video_id: &str, reply: impl Into<String>) {
        self.replies.push(MockReply {
            kind: kind.into(),
            video_id: video_id.into(),
            reply: reply.into(),
        });
    }
}

/// Deterministic canned-reply transport.
pub struct MockTransport {
    queues: Mutex<BTreeMap<(String, String), VecDeque<String>>>,
}

impl MockTransport {
    pub fn new(fixture: MockFixture) -> Self {
        let mut queues: BTreeMap<(String, String), VecDeque<String>> = BTreeMap::new();
        for r in fixture.replies {
            queues
                .entry((r.kind, r.video_id))
                .or_default()
                .push_back(r.reply);
        }
        Self {
            queues: Mutex::new(queues),
        }
    }
}

impl Transport for MockTransport {
    fn send(&self, key: &RequestKey, _payload: &RequestPayload) -> Result<String, GatewayError> {
        let mut queues = self.queues.lock().expect("mock queue lock");
        queues
            .get_mut(&(key.kind.clone(), key.video_id.clone()))
            .and_then(VecDeque::pop_front)
            .ok_or_else(|| GatewayError::Transport {
                detail: format!(
                    "mock fixture has no reply for kind={} video={}",
                    key.kind, key.video_id
                ),
            })
    }
}

/// Chat-completion HTTP transport. The request interleaves one text part
/// with one image part per frame reference; the reply's first choice
/// content is returned verbatim.
pub struct HttpTransport {
    endpoint: ModelEndpoint,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(endpoint: ModelEndpoint) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs_f64(endpoint.timeout_s))
            .build()
            .map_err(|e| GatewayError::Transport {
                detail: e.to_string(),
            })?;
        Ok(Self { endpoint, client })
    }
}

impl Transport for HttpTransport {
    fn send(&self, _key: &RequestKey, payload: &RequestPayload) -> Result<String, GatewayError> {
        let credential = std::env::var(&self.endpoint.credential_env).map_err(|_| {
            GatewayError::MissingCredential {
                var: self.endpoint.credential_env.clone(),
            }
        })?;
        let mut content = vec![serde_json::json!({"type": "text", "text": payload.text})];
        for frame in &payload.frame_refs {
            content.push(serde_json::json!({
                "type": "image_url",
                "image_url": {"url": frame},
            }));
        }
        let body = serde_json::json!({
            "model": self.endpoint.model,
            "messages": [{"role": "user", "content": content}],
        });
        let url = format!("{}/chat/completions", self.endpoint.base_url.trim_end_matches('/'));
        let response = self
            .client
            .post(&url)
            .bearer_auth(credential)
            .json(&body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    GatewayError::Timeout {
                        seconds: self.endpoint.timeout_s,
                    }
                } else {
                    GatewayError::Transport {
                        detail: e.to_string(),
                    }
                }
            })?;
        let status = response.status();
        if !status.is_success() {
            return Err(GatewayError::Transport {
                detail: format!("{url} returned {status}"),
            });
        }
        let parsed: serde_json::Value = response.json().map_err(|e| GatewayError::Transport {
            detail: e.to_string(),
        })?;
        parsed["choices"][0]["message"]["content"]
            .as_str()
            .map(String::from)
            .ok_or_else(|| GatewayError::Transport {
                detail: "response missing choices[0].message.content".into(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn payload() -> RequestPayload {
        RequestPayload {
            text: "hi".into(),
            frame_refs: vec![],
        }
    }

    #[test]
    fn mock_replies_in_order_per_key() {
        let mut fixture = MockFixture::default();
        fixture.push("answer", "v1", "first");
        fixture.push("answer", "v1", "second");
        fixture.push("answer", "v2", "other");
        let transport = MockTransport::new(fixture);
        let key = RequestKey {
            kind: "answer".into(),
            video_id: "v1".into(),
        };
        assert_eq!(transport.send(&key, &payload()).unwrap(), "first");
        assert_eq!(transport.send(&key, &payload()).unwrap(), "second");
        assert!(transport.send(&key, &payload()).is_err());
        let key2 = RequestKey {
            kind: "answer".into(),
            video_id: "v2".into(),
        };
        assert_eq!(transport.send(&key2, &payload()).unwrap(), "other");
    }

    #[test]
    fn unreachable_endpoint_is_a_transport_error() {
        let endpoint = ModelEndpoint {
            base_url: "http://127.0.0.1:9".into(), // discard port, refuses fast
            timeout_s: 2.0,
            transport: super::super::TransportKind::Http,
            ..ModelEndpoint::default()
        };
        std::env::set_var("DYNCOG_TEST_KEY", "k");
        let endpoint = ModelEndpoint {
            credential_env: "DYNCOG_TEST_KEY".into(),
            ..endpoint
        };
        let transport = HttpTransport::new(endpoint).unwrap();
        let key = RequestKey {
            kind: "answer".into(),
            video_id: "v".into(),
        };
        match transport.send(&key, &payload()) {
            Err(GatewayError::Transport { .. }) | Err(GatewayError::Timeout { .. }) => {}
            other => panic!("expected transport error, got {other:?}"),
        }
    }

    #[test]
    fn missing_credential_is_reported() {
        let endpoint = ModelEndpoint {
            credential_env: "DYNCOG_SURELY_UNSET_VAR".into(),
            base_url: "http://127.0.0.1:9".into(),
            ..ModelEndpoint::default()
        };
        let transport = HttpTransport::new(endpoint).unwrap();
        let key = RequestKey {
            kind: "answer".into(),
            video_id: "v".into(),
        };
        assert!(matches!(
            transport.send(&key, &payload()),
            Err(GatewayError::MissingCredential { .. })
        ));
    }
}
