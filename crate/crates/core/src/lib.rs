//! Toolkit for object-centric understanding of dynamic RGB-D video.
//!
//! The pipeline goes: load a per-video manifest ([`scene`]), reconstruct
//! metric object trajectories ([`kinematics`]), classify inter-object and
//! camera-object relations ([`relations`]), render the result as a textual
//! cognitive map ([`tcm`]), and feed that map — together with raw or
//! mask-overlaid frames ([`fusion`]) — to a multimodal model ([`gateway`])
//! to generate and answer dynamic-scene QA. Videos are admitted to the
//! dataset by the dynamism filter ([`filter`]) and results are scored by
//! [`metrics`].
//!
//! All stages are deterministic given the same inputs, configuration, and
//! seed; randomness is derived from a single master seed via [`seed`].

pub mod filter;
pub mod fusion;
pub mod gateway;
pub mod kinematics;
pub mod metrics;
pub mod relations;
pub mod scene;
pub mod seed;
pub mod synth;
pub mod tcm;

pub use filter::{DynamismScore, ForestModel, GateDecision, GateThresholds};
pub use kinematics::{ObjectTrack, TrackSet, TrajectorySample};
pub use metrics::{GroundingItem, Level, QAItem, ScoreReport, Subtask};
pub use relations::{DirectionSample, Relation, RelationSample, RelationTimeline};
pub use scene::{
    CameraPose, DepthMap, InstanceMask, Intrinsics, MaskGrid, Masklet, PoseConvention,
    VideoManifest,
};
pub use tcm::{CognitiveMap, TcmConfig};

/// Videos are resampled to this rate before trajectory reconstruction and
/// everything downstream of it.
pub const TARGET_FPS: f64 = 6.0;
