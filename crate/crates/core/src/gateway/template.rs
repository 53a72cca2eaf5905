//! The six prompt templates and payload rendering.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::GatewayError;
use crate::metrics::Level;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    InterObjectVqa,
    ObjectSceneVqa,
    CameraObjectVqa,
    InterObjectGrounding,
    ObjectSceneGrounding,
    CameraObjectGrounding,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 6] = [
        TemplateKind::InterObjectVqa,
        TemplateKind::ObjectSceneVqa,
        TemplateKind::CameraObjectVqa,
        TemplateKind::InterObjectGrounding,
        TemplateKind::ObjectSceneGrounding,
        TemplateKind::CameraObjectGrounding,
    ];

    pub fn level(self) -> Level {
        match self {
            TemplateKind::InterObjectVqa | TemplateKind::InterObjectGrounding => Level::InterObject,
            TemplateKind::ObjectSceneVqa | TemplateKind::ObjectSceneGrounding => Level::ObjectScene,
            TemplateKind::CameraObjectVqa | TemplateKind::CameraObjectGrounding => {
                Level::CameraObject
            }
        }
    }

    pub fn is_grounding(self) -> bool {
        matches!(
            self,
            TemplateKind::InterObjectGrounding
                | TemplateKind::ObjectSceneGrounding
                | TemplateKind::CameraObjectGrounding
        )
    }

    pub fn slug(self) -> &'static str {
        match self {
            TemplateKind::InterObjectVqa => "inter_object_vqa",
            TemplateKind::ObjectSceneVqa => "object_scene_vqa",
            TemplateKind::CameraObjectVqa => "camera_object_vqa",
            TemplateKind::InterObjectGrounding => "inter_object_grounding",
            TemplateKind::ObjectSceneGrounding => "object_scene_grounding",
            TemplateKind::CameraObjectGrounding => "camera_object_grounding",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.slug() == s)
    }
}

/// A prompt template body with `{TCM}`, `{FRAMES}`, `{LEVEL_RULES}`
/// placeholders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub kind: TemplateKind,
    pub body: String,
}

impl PromptTemplate {
    /// The built-in template for a kind.
    pub fn builtin(kind: TemplateKind) -> Self {
        let body = match kind {
            TemplateKind::InterObjectVqa => {
                include_str!("../../assets/prompts/inter_object_vqa.txt")
            }
            TemplateKind::ObjectSceneVqa => {
                include_str!("../../assets/prompts/object_scene_vqa.txt")
            }
            TemplateKind::CameraObjectVqa => {
                include_str!("../../assets/prompts/camera_object_vqa.txt")
            }
            TemplateKind::InterObjectGrounding => {
                include_str!("../../assets/prompts/inter_object_grounding.txt")
            }
            TemplateKind::ObjectSceneGrounding => {
                include_str!("../../assets/prompts/object_scene_grounding.txt")
            }
            TemplateKind::CameraObjectGrounding => {
                include_str!("../../assets/prompts/camera_object_grounding.txt")
            }
        };
        Self {
            kind,
            body: body.to_string(),
        }
    }

    pub fn from_file(kind: TemplateKind, path: &Path) -> std::io::Result<Self> {
        Ok(Self {
            kind,
            body: std::fs::read_to_string(path)?,
        })
    }
}

fn level_rules(level: Level) -> String {
    let subtasks = level
        .subtasks()
        .iter()
        .map(|s| format!("\"{}\"", s.label()))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "This request targets the {} level. Valid subtask names: {subtasks}.",
        level.label()
    )
}

/// A rendered request: final prompt text plus ordered frame references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestPayload {
    pub text: String,
    pub frame_refs: Vec<String>,
}

/// Substitutes the template placeholders.
///
/// The template kind must serve the requested level; a `{TCM}` placeholder
/// with no map supplied is unresolvable. Templates without `{TCM}` pass any
/// map through untouched (the body just does not quote it).
pub fn render_prompt(
    template: &PromptTemplate,
    tcm_document: Option<&str>,
    frame_refs: &[String],
    level: Level,
) -> Result<RequestPayload, GatewayError> {
    if template.kind.level() != level {
        return Err(GatewayError::KindMismatch {
            kind: template.kind,
            level,
        });
    }
    let mut text = template.body.clone();
    if text.contains("{TCM}") {
        let tcm = tcm_document.ok_or(GatewayError::UnresolvedPlaceholder {
            name: "TCM".into(),
        })?;
        text = text.replace("{TCM}", tcm);
    }
    let listing = frame_refs
        .iter()
        .enumerate()
        .map(|(i, p)| format!("[frame {i}] {p}"))
        .collect::<Vec<_>>()
        .join("\n");
    text = text.replace("{FRAMES}", &listing);
    text = text.replace("{LEVEL_RULES}", &level_rules(level));
    Ok(RequestPayload {
        text,
        frame_refs: frame_refs.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tcm_substitution_is_verbatim() {
        let template = PromptTemplate::builtin(TemplateKind::InterObjectVqa);
        let tcm = "line one\nline two\nline three";
        let payload = render_prompt(&template, Some(tcm), &[], Level::InterObject).unwrap();
        assert!(payload.text.contains(tcm));
        assert!(!payload.text.contains("{TCM}"));
        assert!(!payload.text.contains("{LEVEL_RULES}"));
    }

    #[test]
    fn template_without_tcm_placeholder_passes_through() {
        let template = PromptTemplate {
            kind: TemplateKind::ObjectSceneVqa,
            body: "frames: {FRAMES}".into(),
        };
        let payload = render_prompt(
            &template,
            Some("ignored"),
            &["a.png".into()],
            Level::ObjectScene,
        )
        .unwrap();
        assert_eq!(payload.text, "frames: [frame 0] a.png");
    }

    #[test]
    fn missing_tcm_is_unresolved() {
        let template = PromptTemplate::builtin(TemplateKind::InterObjectVqa);
        assert!(matches!(
            render_prompt(&template, None, &[], Level::InterObject),
            Err(GatewayError::UnresolvedPlaceholder { .. })
        ));
    }

    #[test]
    fn kind_level_mismatch_rejected() {
        let template = PromptTemplate::builtin(TemplateKind::InterObjectVqa);
        assert!(matches!(
            render_prompt(&template, Some(""), &[], Level::CameraObject),
            Err(GatewayError::KindMismatch { .. })
        ));
    }

    #[test]
    fn kind_slug_roundtrip() {
        for kind in TemplateKind::ALL {
            assert_eq!(TemplateKind::parse(kind.slug()), Some(kind));
        }
    }
}
