//! Dataset data model: video manifests and per-frame depth, mask, and pose
//! assets.
//!
//! A video is described by a single JSON manifest listing relative asset
//! paths, one entry per frame (see [`load_manifest`] for the schema). All
//! types are immutable after construction, so loading and processing
//! different videos can proceed concurrently without shared state.

mod depth;
mod manifest;
pub(crate) mod mask;
mod rle;
mod types;

pub use depth::{decode_depth, encode_raw_depth};
pub use manifest::{load_manifest, resample, save_manifest};
pub use mask::{
    decode_masks, encode_mask_image, load_masklets, read_category_sidecar, CATEGORY_SIDECAR,
};
pub use rle::{decode_rle, encode_rle, masklet_from_rle, masklet_to_rle, MaskRle, MaskletRle};
pub use types::{
    CameraPose, DepthMap, FrameEntry, GeometryProvenance, InstanceMask, Intrinsics, MaskGrid,
    Masklet, PoseConvention, SourceDataset, VideoManifest,
};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("missing asset: {path}")]
    MissingAsset { path: PathBuf },
    #[error("manifest schema violation: {detail}")]
    SchemaViolation { detail: String },
    #[error("degenerate video: {frames} frame(s), need at least 2")]
    DegenerateVideo { frames: usize },
    #[error("unsupported encoding for {path}: {detail}")]
    UnsupportedEncoding { path: PathBuf, detail: String },
    #[error("corrupt asset {path}: {detail}")]
    CorruptAsset { path: PathBuf, detail: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
