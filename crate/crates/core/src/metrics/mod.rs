//! VQA accuracy, chance baselines, and J / F / J&F grounding metrics,
//! aggregated per level and subtask.

mod ablation;
mod mask_scoring;
mod qa;
mod report;

pub use ablation::{round1, AblationRow, AblationTable};
pub use mask_scoring::{
    boundary_accuracy_f, default_boundary_tolerance, jf_masklet, jf_masklet_with_tolerance,
    region_similarity_j,
};
pub use qa::{
    accuracy, chance_frequency, chance_random, parse_reply, AnswerLabel, GroundingItem, Level,
    QAItem, QaOutcome, Subtask, SubtaskTally,
};
pub use report::{build_report, GroundingOutcome, JfAggregate, ScoreReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("masks are {a_w}x{a_h} vs {b_w}x{b_h}")]
    DimensionMismatch {
        a_w: u32,
        a_h: u32,
        b_w: u32,
        b_h: u32,
    },
    #[error("gold masklet has no frames to score")]
    NoOverlappingFrames,
    #[error("prediction references unknown qa_id {qa_id:?}")]
    UnknownQaId { qa_id: String },
    #[error("invalid item: {detail}")]
    InvalidItem { detail: String },
}
