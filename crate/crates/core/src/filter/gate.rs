//! Accept/reject gate combining the dynamism score, geometric stability,
//! and an optional VLM verdict.

use serde::{Deserialize, Serialize};

use super::{DynamismScore, GeometricFeatures};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateThresholds {
    /// Minimum dynamism score to keep a video.
    pub min_score: f64,
    /// Maximum relative std of the focal length.
    pub max_focal_stability: f64,
    /// Maximum single-step camera rotation in degrees.
    pub max_rotation_step_deg: f64,
}

impl Default for GateThresholds {
    fn default() -> Self {
        Self {
            min_score: 3.0,
            max_focal_stability: 0.02,
            max_rotation_step_deg: 15.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VlmVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectReason {
    LowDynamism { score: f64, min: f64 },
    FocalInstability { value: f64, max: f64 },
    PoseJump { value_deg: f64, max_deg: f64 },
    VlmRejected,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateDecision {
    pub accept: bool,
    pub reasons: Vec<RejectReason>,
}

/// Pure accept/reject decision: accept iff the score clears `min_score`,
/// both geometric gates pass, and the VLM verdict (when present) passes.
/// Rejections carry machine-readable reasons.
pub fn gate_decision(
    score: &DynamismScore,
    geometric: &GeometricFeatures,
    vlm_verdict: Option<VlmVerdict>,
    thresholds: &GateThresholds,
) -> GateDecision {
    let mut reasons = Vec::new();
    if score.value < thresholds.min_score {
        reasons.push(RejectReason::LowDynamism {
            score: score.value,
            min: thresholds.min_score,
        });
    }
    if geometric.focal_stability > thresholds.max_focal_stability {
        reasons.push(RejectReason::FocalInstability {
            value: geometric.focal_stability,
            max: thresholds.max_focal_stability,
        });
    }
    if geometric.max_rotation_step_deg > thresholds.max_rotation_step_deg {
        reasons.push(RejectReason::PoseJump {
            value_deg: geometric.max_rotation_step_deg,
            max_deg: thresholds.max_rotation_step_deg,
        });
    }
    if vlm_verdict == Some(VlmVerdict::Fail) {
        reasons.push(RejectReason::VlmRejected);
    }
    GateDecision {
        accept: reasons.is_empty(),
        reasons,
    }
}
