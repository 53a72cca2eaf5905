//! QA/grounding generation, VQA answering, and diagnostic extraction.

use serde::Deserialize;

use super::template::{render_prompt, PromptTemplate, RequestPayload};
use super::transport::{HttpTransport, MockFixture, MockTransport, RequestKey, Transport};
use super::{GatewayError, ModelEndpoint, TransportKind};
use crate::filter::DiagnosticVector;
use crate::metrics::{AnswerLabel, GroundingItem, QAItem, Subtask};
use crate::scene::{load_masklets, masklet_to_rle, VideoManifest};

/// Request kind strings used in mock fixtures beyond the six templates.
pub const ANSWER_KIND: &str = "answer";
pub const DIAGNOSTIC_KIND: &str = "diagnostic";

pub struct Gateway {
    pub endpoint: ModelEndpoint,
    transport: Box<dyn Transport>,
    /// Full-payload re-sends after a malformed generation.
    pub retries: u32,
}

/// A reply (or reply item) rejected during validation, preserved for audit.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RejectedReply {
    pub reason: String,
    pub raw: String,
}

/// Validated output of one generation call.
#[derive(Debug, Default)]
pub struct Generation {
    pub qa: Vec<QAItem>,
    pub grounding: Vec<GroundingItem>,
    pub rejected: Vec<RejectedReply>,
}

impl Gateway {
    pub fn new(endpoint: ModelEndpoint) -> Result<Self, GatewayError> {
        let transport: Box<dyn Transport> = match endpoint.transport {
            TransportKind::Http => Box::new(HttpTransport::new(endpoint.clone())?),
            TransportKind::Mock => {
                return Err(GatewayError::Transport {
                    detail: "mock transport requires a fixture; use Gateway::with_mock".into(),
                })
            }
        };
        Ok(Self {
            endpoint,
            transport,
            retries: 2,
        })
    }

    pub fn with_mock(fixture: MockFixture) -> Self {
        Self {
            endpoint: ModelEndpoint::default(),
            transport: Box::new(MockTransport::new(fixture)),
            retries: 2,
        }
    }

    /// Generates QA or grounding items for one video.
    ///
    /// The model must reply with a fenced JSON block; anything outside the
    /// block is ignored. Replies that fail schema validation are retried
    /// with the full payload up to `retries` times, then surface as
    /// `MalformedGeneration` with the raw reply preserved. Grounding items
    /// naming an object id absent from the manifest are rejected
    /// individually (reason `UnknownObject`) without failing the call.
    pub fn generate_qa(
        &self,
        manifest: &VideoManifest,
        tcm_document: Option<&str>,
        template: &PromptTemplate,
    ) -> Result<Generation, GatewayError> {
        let frame_refs = frame_refs(manifest);
        let payload = render_prompt(template, tcm_document, &frame_refs, template.kind.level())?;
        let key = RequestKey {
            kind: template.kind.slug().to_string(),
            video_id: manifest.video_id.clone(),
        };

        let mut last_error: Option<GatewayError> = None;
        for _attempt in 0..=self.retries {
            let raw = self.transport.send(&key, &payload)?;
            match self.parse_generation(manifest, template, &raw) {
                Ok(generation) => return Ok(generation),
                Err(detail) => {
                    last_error = Some(GatewayError::MalformedGeneration { detail, raw });
                }
            }
        }
        Err(last_error.expect("at least one attempt"))
    }

    fn parse_generation(
        &self,
        manifest: &VideoManifest,
        template: &PromptTemplate,
        raw: &str,
    ) -> Result<Generation, String> {
        let block = fenced_block(raw).ok_or("reply has no fenced block")?;
        let mut generation = Generation::default();
        if template.kind.is_grounding() {
            let parsed: GroundingReply =
                serde_json::from_str(block).map_err(|e| format!("bad grounding JSON: {e}"))?;
            let masklets = load_masklets(manifest).map_err(|e| e.to_string())?;
            for (i, item) in parsed.items.iter().enumerate() {
                let Some(masklet) = masklets.iter().find(|m| m.object_id == item.object_id) else {
                    generation.rejected.push(RejectedReply {
                        reason: format!("UnknownObject: object_id {} not in manifest", item.object_id),
                        raw: serde_json::to_string(item).unwrap_or_default(),
                    });
                    continue;
                };
                let grounding = GroundingItem {
                    item_id: format!("{}-{}-{i:03}", manifest.video_id, template.kind.slug()),
                    video_id: manifest.video_id.clone(),
                    level: template.kind.level(),
                    referring_text: item.referring_text.clone(),
                    gold: masklet_to_rle(masklet),
                };
                grounding.validate().map_err(|e| e.to_string())?;
                generation.grounding.push(grounding);
            }
        } else {
            let parsed: VqaReply =
                serde_json::from_str(block).map_err(|e| format!("bad QA JSON: {e}"))?;
            for (i, item) in parsed.items.iter().enumerate() {
                if item.options.len() != 4 {
                    return Err(format!(
                        "item {i}: {} options, generation requires exactly 4",
                        item.options.len()
                    ));
                }
                let answer = item
                    .answer
                    .chars()
                    .next()
                    .and_then(AnswerLabel::from_char)
                    .filter(|_| item.answer.len() == 1)
                    .ok_or(format!("item {i}: bad answer label {:?}", item.answer))?;
                let subtask = Subtask::parse_label(&item.subtask)
                    .ok_or(format!("item {i}: unknown subtask {:?}", item.subtask))?;
                if subtask.level() != template.kind.level() {
                    return Err(format!(
                        "item {i}: subtask {:?} is not a {} subtask",
                        item.subtask,
                        template.kind.level().label()
                    ));
                }
                let qa = QAItem {
                    qa_id: format!("{}-{}-{i:03}", manifest.video_id, template.kind.slug()),
                    video_id: manifest.video_id.clone(),
                    level: template.kind.level(),
                    subtask,
                    question: item.question.clone(),
                    options: item.options.clone(),
                    answer,
                };
                qa.validate().map_err(|e| e.to_string())?;
                generation.qa.push(qa);
            }
        }
        Ok(generation)
    }

    /// Answers one multiple-choice item. The raw reply comes back untouched;
    /// mapping to a label happens in the metrics module.
    pub fn answer_vqa(
        &self,
        frame_refs: &[String],
        item: &QAItem,
        tcm_document: Option<&str>,
    ) -> Result<String, GatewayError> {
        let mut text = String::new();
        if let Some(tcm) = tcm_document {
            text.push_str("Structured scene description:\n");
            text.push_str(tcm);
            text.push_str("\n\n");
        }
        text.push_str(&item.question);
        text.push('\n');
        for (label, option) in item.labels().iter().zip(&item.options) {
            text.push_str(&format!("{label}. {option}\n"));
        }
        text.push_str("Answer with the letter of the correct option.\n");
        let payload = RequestPayload {
            text,
            frame_refs: frame_refs.to_vec(),
        };
        let key = RequestKey {
            kind: ANSWER_KIND.to_string(),
            video_id: item.video_id.clone(),
        };
        self.transport.send(&key, &payload)
    }

    /// Asks the 26 diagnostic questions and parses the answer vector.
    pub fn run_diagnostics(
        &self,
        video_id: &str,
        frame_refs: &[String],
        questions: &[String],
    ) -> Result<DiagnosticVector, GatewayError> {
        let mut text = String::from(
            "Answer each question about the video with a number in [0, 1].\n",
        );
        for q in questions {
            text.push_str(q);
            text.push('\n');
        }
        text.push_str(
            "Reply with a single fenced JSON block: ```json\n{\"answers\": [ ... ]}\n```\n",
        );
        let payload = RequestPayload {
            text,
            frame_refs: frame_refs.to_vec(),
        };
        let key = RequestKey {
            kind: DIAGNOSTIC_KIND.to_string(),
            video_id: video_id.to_string(),
        };

        let mut last_error: Option<GatewayError> = None;
        for _attempt in 0..=self.retries {
            let raw = self.transport.send(&key, &payload)?;
            let parsed = fenced_block(&raw)
                .ok_or_else(|| "reply has no fenced block".to_string())
                .and_then(|block| {
                    serde_json::from_str::<DiagnosticReply>(block)
                        .map_err(|e| format!("bad diagnostic JSON: {e}"))
                })
                .and_then(|r| DiagnosticVector::new(r.answers).map_err(|e| e.to_string()));
            match parsed {
                Ok(v) => return Ok(v),
                Err(detail) => last_error = Some(GatewayError::MalformedGeneration { detail, raw }),
            }
        }
        Err(last_error.expect("at least one attempt"))
    }
}

/// Ordered RGB frame references for prompting.
pub fn frame_refs(manifest: &VideoManifest) -> Vec<String> {
    manifest
        .frames
        .iter()
        .map(|f| manifest.resolve(&f.rgb_ref).display().to_string())
        .collect()
}

/// Extracts the first fenced code block, tolerating a language tag after
/// the opening fence.
fn fenced_block(raw: &str) -> Option<&str> {
    let open = raw.find("```")?;
    let after_fence = &raw[open + 3..];
    let body_start = after_fence.find('\n').map(|i| i + 1).unwrap_or(0);
    let body = &after_fence[body_start..];
    let close = body.find("```")?;
    Some(body[..close].trim())
}

#[derive(Debug, Deserialize)]
struct VqaReply {
    items: Vec<VqaReplyItem>,
}

#[derive(Debug, Deserialize)]
struct VqaReplyItem {
    question: String,
    options: Vec<String>,
    answer: String,
    subtask: String,
}

#[derive(Debug, Deserialize, serde::Serialize)]
struct GroundingReply {
    items: Vec<GroundingReplyItem>,
}

#[derive(Debug, Deserialize, serde::Serialize)]
struct GroundingReplyItem {
    referring_text: String,
    object_id: u32,
}

#[derive(Debug, Deserialize)]
struct DiagnosticReply {
    answers: Vec<f64>,
}
