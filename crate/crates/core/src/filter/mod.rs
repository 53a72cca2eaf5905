//! Multi-stage video dynamism filter.
//!
//! Stages: low-level motion statistics, geometric stability, dynamic object
//! coverage, a 26-question diagnostic vector answered by a multimodal model,
//! a random-forest regressor mapping the assembled feature vector to a
//! dynamism score in [0, 5], and a gate combining the score with hard
//! geometric checks and an optional VLM verdict.

mod coverage;
mod features;
mod forest;
mod gate;
mod geometry;
mod motion;

pub use coverage::{dynamic_coverage, CoverageFeatures};
pub use features::{
    assemble_features, load_question_bank, question_bank, DiagnosticVector, FeatureGroup,
    FeatureLayout, DIAGNOSTIC_QUESTION_COUNT,
};
pub use forest::{
    load_forest, save_forest, score_video, train_forest, DynamismScore, ForestModel, TrainParams,
};
pub use gate::{gate_decision, GateDecision, GateThresholds, RejectReason, VlmVerdict};
pub use geometry::{geometric_features, GeometricFeatures};
pub use motion::{motion_features, GrayFrame, MotionFeatures};

use thiserror::Error;

use crate::scene::{load_masklets, SceneError, VideoManifest};

/// Decodes every RGB frame to grayscale for motion statistics.
pub fn load_gray_frames(manifest: &VideoManifest) -> Result<Vec<GrayFrame>, FilterError> {
    manifest
        .frames
        .iter()
        .map(|f| {
            let path = manifest.resolve(&f.rgb_ref);
            let img = image::open(&path)
                .map_err(|e| {
                    FilterError::Scene(SceneError::CorruptAsset {
                        path,
                        detail: e.to_string(),
                    })
                })?
                .to_rgb8();
            Ok(GrayFrame::from_rgb(&img))
        })
        .collect()
}

/// One-call feature extraction for a video: motion, geometric, and coverage
/// features plus the supplied diagnostics, assembled under `layout`.
/// Returns the vector together with the geometric features the gate needs.
pub fn extract_features(
    manifest: &VideoManifest,
    diagnostic: &DiagnosticVector,
    layout: &FeatureLayout,
) -> Result<(Vec<f64>, GeometricFeatures), FilterError> {
    let gray = load_gray_frames(manifest)?;
    let motion = motion_features(&gray, manifest.fps)?;
    let geometric = geometric_features(manifest)?;
    let masklets = load_masklets(manifest)?;
    let coverage = dynamic_coverage(
        &masklets,
        manifest.frame_count(),
        manifest.intrinsics.width,
        manifest.intrinsics.height,
    );
    let vector = assemble_features(&motion, &geometric, &coverage, diagnostic, layout);
    Ok((vector, geometric))
}

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("need at least 2 frames, got {frames}")]
    TooFewFrames { frames: usize },
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("training label {label} outside [0, 5]")]
    LabelOutOfRange { label: f64 },
    #[error("feature vector has {got} dims, model expects {expected}")]
    LayoutMismatch { expected: usize, got: usize },
    #[error("diagnostic vector invalid: {detail}")]
    InvalidDiagnostic { detail: String },
    #[error("bad forest file: {detail}")]
    ModelParse { detail: String },
    #[error(transparent)]
    Scene(#[from] crate::scene::SceneError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
