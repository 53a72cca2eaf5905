//! Gateway to an external multimodal model: prompt templating, QA and
//! grounding generation, VQA answering, and diagnostic questioning — with a
//! deterministic mock transport for tests.
//!
//! The gateway never interprets model content beyond schema validation;
//! answer scoring lives in [`crate::metrics`].

mod generate;
mod template;
mod transport;

pub use generate::{frame_refs, Gateway, Generation, RejectedReply, ANSWER_KIND, DIAGNOSTIC_KIND};
pub use template::{render_prompt, PromptTemplate, RequestPayload, TemplateKind};
pub use transport::{HttpTransport, MockFixture, MockTransport, RequestKey, Transport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable consulted for API credentials by default.
pub const DEFAULT_CREDENTIAL_ENV: &str = "DYNCOG_API_KEY";

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("template placeholder {{{name}}} cannot be resolved")]
    UnresolvedPlaceholder { name: String },
    #[error("template kind {kind:?} does not serve level {level:?}")]
    KindMismatch {
        kind: TemplateKind,
        level: crate::metrics::Level,
    },
    #[error("transport error: {detail}")]
    Transport { detail: String },
    #[error("request timed out after {seconds} s")]
    Timeout { seconds: f64 },
    #[error("malformed generation after retries: {detail}; raw reply preserved")]
    MalformedGeneration { detail: String, raw: String },
    #[error("credential variable {var} not set")]
    MissingCredential { var: String },
    #[error(transparent)]
    Scene(#[from] crate::scene::SceneError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    Http,
    Mock,
}

/// Where and how to reach the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelEndpoint {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key. Credentials
    /// are only ever read from the environment, never from files.
    pub credential_env: String,
    pub timeout_s: f64,
    pub transport: TransportKind,
}

impl Default for ModelEndpoint {
    fn default() -> Self {
        Self {
            base_url: "http://localhost:8000/v1".into(),
            model: "qwen3-vl".into(),
            credential_env: DEFAULT_CREDENTIAL_ENV.into(),
            timeout_s: 120.0,
            transport: TransportKind::Mock,
        }
    }
}
