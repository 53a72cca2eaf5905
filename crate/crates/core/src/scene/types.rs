use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

use super::SceneError;

const ORTHONORMAL_TOL: f64 = 1e-6;

/// Pinhole camera intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    pub fn validate(&self) -> Result<(), SceneError> {
        let ok = self.fx > 0.0
            && self.fy > 0.0
            && self.cx >= 0.0
            && self.cx < f64::from(self.width)
            && self.cy >= 0.0
            && self.cy < f64::from(self.height);
        if ok {
            Ok(())
        } else {
            Err(SceneError::SchemaViolation {
                detail: format!("invalid intrinsics: {self:?}"),
            })
        }
    }
}

/// Direction the stored rotation/translation maps between.
///
/// The eight source datasets do not share a pose convention, so the manifest
/// states it explicitly instead of the loader guessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoseConvention {
    /// `p_world = R * p_camera + t`
    WorldFromCamera,
    /// `p_camera = R * p_world + t`
    CameraFromWorld,
}

/// A camera pose: a rotation plus translation under an explicit convention.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraPose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    pub convention: PoseConvention,
}

impl CameraPose {
    pub fn new(
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
        convention: PoseConvention,
    ) -> Result<Self, SceneError> {
        let pose = Self {
            rotation,
            translation,
            convention,
        };
        pose.validate()?;
        Ok(pose)
    }

    pub fn identity(convention: PoseConvention) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
            convention,
        }
    }

    /// Row-major `[R | t]`, the 12-number form used in manifests.
    pub fn from_row_major_3x4(m: &[f64; 12], convention: PoseConvention) -> Result<Self, SceneError> {
        let rotation = Matrix3::new(m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]);
        let translation = Vector3::new(m[3], m[7], m[11]);
        Self::new(rotation, translation, convention)
    }

    pub fn to_row_major_3x4(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            t[0],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            t[1],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t[2],
        ]
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let gram = self.rotation.transpose() * self.rotation;
        let err = (gram - Matrix3::identity()).abs().max();
        if err > ORTHONORMAL_TOL {
            return Err(SceneError::SchemaViolation {
                detail: format!("rotation not orthonormal (max |R'R - I| = {err:.2e})"),
            });
        }
        let det = self.rotation.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(SceneError::SchemaViolation {
                detail: format!("rotation determinant {det} != +1"),
            });
        }
        Ok(())
    }

    /// World-frame point for a camera-frame point, under either convention.
    pub fn to_world(&self, camera_point: &Vector3<f64>) -> Vector3<f64> {
        match self.convention {
            PoseConvention::WorldFromCamera => self.rotation * camera_point + self.translation,
            PoseConvention::CameraFromWorld => {
                self.rotation.transpose() * (camera_point - self.translation)
            }
        }
    }

    /// Camera-frame point for a world-frame point.
    pub fn to_camera(&self, world_point: &Vector3<f64>) -> Vector3<f64> {
        match self.convention {
            PoseConvention::WorldFromCamera => {
                self.rotation.transpose() * (world_point - self.translation)
            }
            PoseConvention::CameraFromWorld => self.rotation * world_point + self.translation,
        }
    }

    /// Camera center expressed in world coordinates.
    pub fn camera_center_world(&self) -> Vector3<f64> {
        self.to_world(&Vector3::zeros())
    }

    /// The same pose normalized to the world-from-camera convention.
    pub fn as_world_from_camera(&self) -> (Matrix3<f64>, Vector3<f64>) {
        match self.convention {
            PoseConvention::WorldFromCamera => (self.rotation, self.translation),
            PoseConvention::CameraFromWorld => (
                self.rotation.transpose(),
                -(self.rotation.transpose() * self.translation),
            ),
        }
    }
}

/// Per-frame depth in meters. Sentinel pixels (stored 0 for integer
/// encodings, non-finite or non-positive for float) are marked invalid and
/// excluded from every statistic.
#[derive(Debug, Clone)]
pub struct DepthMap {
    pub width: u32,
    pub height: u32,
    values: Vec<f32>,
    valid: Vec<bool>,
    pub scale_hint: f64,
}

impl DepthMap {
    pub fn from_meters(width: u32, height: u32, meters: Vec<f32>, scale_hint: f64) -> Self {
        assert_eq!(meters.len(), (width as usize) * (height as usize));
        let valid = meters.iter().map(|v| v.is_finite() && *v > 0.0).collect();
        Self {
            width,
            height,
            values: meters,
            valid,
            scale_hint,
        }
    }

    /// Depth in meters at pixel `(u, v)`, or `None` for invalid pixels.
    pub fn get(&self, u: u32, v: u32) -> Option<f64> {
        if u >= self.width || v >= self.height {
            return None;
        }
        let i = (v as usize) * (self.width as usize) + (u as usize);
        self.valid[i].then(|| f64::from(self.values[i]))
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn pixel_count(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(u, v, meters)` over valid pixels.
    pub fn iter_valid(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        let w = self.width;
        self.values
            .iter()
            .zip(self.valid.iter())
            .enumerate()
            .filter_map(move |(i, (val, ok))| {
                ok.then(|| ((i as u32) % w, (i as u32) / w, f64::from(*val)))
            })
    }
}

/// A binary pixel grid. Unlike [`InstanceMask`] it may be empty, which makes
/// it the right argument type for mask metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskGrid {
    pub width: u32,
    pub height: u32,
    pixels: Vec<bool>,
}

impl MaskGrid {
    pub fn new(width: u32, height: u32, pixels: Vec<bool>) -> Self {
        assert_eq!(pixels.len(), (width as usize) * (height as usize));
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn empty(width: u32, height: u32) -> Self {
        Self::new(width, height, vec![false; (width as usize) * (height as usize)])
    }

    pub fn get(&self, u: u32, v: u32) -> bool {
        u < self.width && v < self.height && self.pixels[(v as usize) * (self.width as usize) + (u as usize)]
    }

    pub fn set(&mut self, u: u32, v: u32, on: bool) {
        let i = (v as usize) * (self.width as usize) + (u as usize);
        self.pixels[i] = on;
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|p| **p).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|p| *p)
    }

    /// Iterates `(u, v)` over set pixels in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.pixels
            .iter()
            .enumerate()
            .filter_map(move |(i, on)| on.then(|| ((i as u32) % w, (i as u32) / w)))
    }

    /// Inclusive pixel bounds `(umin, vmin, umax, vmax)` of set pixels.
    pub fn bbox(&self) -> Option<(u32, u32, u32, u32)> {
        let mut b: Option<(u32, u32, u32, u32)> = None;
        for (u, v) in self.iter_set() {
            b = Some(match b {
                None => (u, v, u, v),
                Some((u0, v0, u1, v1)) => (u0.min(u), v0.min(v), u1.max(u), v1.max(v)),
            });
        }
        b
    }
}

/// One object's mask in one frame. Always non-empty: an empty mask means the
/// object is absent that frame and no `InstanceMask` is constructed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceMask {
    pub object_id: u32,
    pub category: String,
    pub grid: MaskGrid,
}

impl InstanceMask {
    pub fn new(object_id: u32, category: impl Into<String>, grid: MaskGrid) -> Result<Self, SceneError> {
        if grid.is_empty() {
            return Err(SceneError::SchemaViolation {
                detail: format!("empty mask for object {object_id}"),
            });
        }
        Ok(Self {
            object_id,
            category: category.into(),
            grid,
        })
    }
}

/// Per-object sequence of per-frame masks spanning a video. Gaps (occlusion,
/// absence) are simply missing frame indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Masklet {
    pub object_id: u32,
    pub category: String,
    pub frames: BTreeMap<usize, InstanceMask>,
}

impl Masklet {
    pub fn new(object_id: u32, category: impl Into<String>) -> Self {
        Self {
            object_id,
            category: category.into(),
            frames: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, t: usize, mask: InstanceMask) {
        debug_assert_eq!(mask.object_id, self.object_id);
        self.frames.insert(t, mask);
    }

    pub fn first_frame(&self) -> Option<usize> {
        self.frames.keys().next().copied()
    }

    pub fn last_frame(&self) -> Option<usize> {
        self.frames.keys().next_back().copied()
    }
}

/// The eight supported source datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceDataset {
    Davis,
    SaV,
    DynPose100k,
    YoutubeVis,
    DynamicReplica,
    PointOdyssey,
    Spring,
    TotalRecon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryProvenance {
    GroundTruth,
    Estimated,
}

/// One frame's asset references and pose. Paths are relative to the manifest
/// file's directory.
#[derive(Debug, Clone)]
pub struct FrameEntry {
    pub rgb_ref: PathBuf,
    pub depth_ref: PathBuf,
    pub mask_ref: PathBuf,
    pub pose: CameraPose,
    /// Per-frame estimated focal length, when geometry is estimated and the
    /// estimator reports one. Used by the focal-stability filter feature.
    pub fx: Option<f64>,
}

/// A validated video description: ordered frames with resolvable assets,
/// shared intrinsics, and an explicit pose convention.
#[derive(Debug, Clone)]
pub struct VideoManifest {
    pub video_id: String,
    pub source_dataset: SourceDataset,
    pub fps: f64,
    pub geometry_provenance: GeometryProvenance,
    pub intrinsics: Intrinsics,
    /// Meters per stored unit for integer depth encodings.
    pub depth_scale: f64,
    pub pose_convention: PoseConvention,
    pub frames: Vec<FrameEntry>,
    /// Directory the asset references resolve against.
    pub root: PathBuf,
    /// object_id -> category, from the mask sidecar table.
    pub categories: BTreeMap<u32, String>,
}

impl VideoManifest {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frame_time(&self, t: usize) -> f64 {
        t as f64 / self.fps
    }

    pub fn resolve(&self, rel: &std::path::Path) -> PathBuf {
        self.root.join(rel)
    }

    pub fn category(&self, object_id: u32) -> String {
        self.categories
            .get(&object_id)
            .cloned()
            .unwrap_or_else(|| format!("object_{object_id}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rot_z(angle: f64) -> Matrix3<f64> {
        let (s, c) = angle.sin_cos();
        Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
    }

    #[test]
    fn pose_rejects_non_orthonormal_rotation() {
        let m = Matrix3::new(1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0);
        assert!(CameraPose::new(m, Vector3::zeros(), PoseConvention::WorldFromCamera).is_err());
    }

    #[test]
    fn pose_rejects_reflection() {
        let m = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0);
        assert!(CameraPose::new(m, Vector3::zeros(), PoseConvention::WorldFromCamera).is_err());
    }

    #[test]
    fn conventions_are_inverse_of_each_other() {
        let r = rot_z(0.7);
        let t = Vector3::new(1.0, -2.0, 3.0);
        let wfc = CameraPose::new(r, t, PoseConvention::WorldFromCamera).unwrap();
        let cam_pt = Vector3::new(0.3, 0.1, 2.0);
        let world = wfc.to_world(&cam_pt);
        assert_relative_eq!(wfc.to_camera(&world), cam_pt, epsilon = 1e-12);

        // Same physical pose stored the other way round.
        let cfw = CameraPose::new(
            r.transpose(),
            -(r.transpose() * t),
            PoseConvention::CameraFromWorld,
        )
        .unwrap();
        assert_relative_eq!(cfw.to_world(&cam_pt), world, epsilon = 1e-12);
        assert_relative_eq!(
            cfw.camera_center_world(),
            wfc.camera_center_world(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn row_major_roundtrip() {
        let pose = CameraPose::new(
            rot_z(0.3),
            Vector3::new(0.5, 0.25, -1.0),
            PoseConvention::CameraFromWorld,
        )
        .unwrap();
        let arr = pose.to_row_major_3x4();
        let back = CameraPose::from_row_major_3x4(&arr, PoseConvention::CameraFromWorld).unwrap();
        assert_eq!(pose, back);
    }

    #[test]
    fn depth_map_sentinels() {
        let d = DepthMap::from_meters(2, 1, vec![1.5, f32::NAN], 0.001);
        assert_eq!(d.get(0, 0), Some(1.5));
        assert_eq!(d.get(1, 0), None);
        assert_eq!(d.valid_count(), 1);
    }

    #[test]
    fn empty_instance_mask_rejected() {
        let grid = MaskGrid::empty(4, 4);
        assert!(InstanceMask::new(1, "car", grid).is_err());
    }

    #[test]
    fn mask_grid_bbox() {
        let mut g = MaskGrid::empty(8, 8);
        g.set(2, 3, true);
        g.set(5, 6, true);
        assert_eq!(g.bbox(), Some((2, 3, 5, 6)));
        assert_eq!(MaskGrid::empty(4, 4).bbox(), None);
    }
}
