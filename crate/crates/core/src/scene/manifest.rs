use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use super::mask::read_category_sidecar;
use super::types::*;
use super::SceneError;

/// On-disk manifest schema. Poses are row-major 3x4 `[R | t]`.
#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    video_id: String,
    source_dataset: SourceDataset,
    fps: f64,
    geometry_provenance: GeometryProvenance,
    intrinsics: Intrinsics,
    #[serde(default = "default_depth_scale")]
    depth_scale: f64,
    pose_convention: PoseConvention,
    frames: Vec<FrameFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameFile {
    rgb: PathBuf,
    depth: PathBuf,
    mask: PathBuf,
    pose: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fx: Option<f64>,
}

fn default_depth_scale() -> f64 {
    0.001
}

/// Loads and fully validates a video manifest.
///
/// Checks the schema, the `>= 2` frame minimum, intrinsics and pose
/// invariants, and that every referenced asset file exists. The id->category
/// sidecar (`categories.json` next to the mask assets) is folded in when
/// present.
pub fn load_manifest(path: &Path) -> Result<VideoManifest, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            SceneError::MissingAsset {
                path: path.to_path_buf(),
            }
        } else {
            SceneError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let file: ManifestFile = serde_json::from_str(&text).map_err(|e| SceneError::SchemaViolation {
        detail: e.to_string(),
    })?;
    let root = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));

    if file.frames.len() < 2 {
        return Err(SceneError::DegenerateVideo {
            frames: file.frames.len(),
        });
    }
    if !(file.fps > 0.0 && file.fps.is_finite()) {
        return Err(SceneError::SchemaViolation {
            detail: format!("fps must be positive, got {}", file.fps),
        });
    }
    if !(file.depth_scale > 0.0 && file.depth_scale.is_finite()) {
        return Err(SceneError::SchemaViolation {
            detail: format!("depth_scale must be positive, got {}", file.depth_scale),
        });
    }
    file.intrinsics.validate()?;

    let mut frames = Vec::with_capacity(file.frames.len());
    for (i, f) in file.frames.iter().enumerate() {
        let nums: [f64; 12] = f.pose.as_slice().try_into().map_err(|_| {
            SceneError::SchemaViolation {
                detail: format!("frame {i}: pose must have 12 numbers, got {}", f.pose.len()),
            }
        })?;
        let pose = CameraPose::from_row_major_3x4(&nums, file.pose_convention)?;
        for rel in [&f.rgb, &f.depth, &f.mask] {
            let abs = root.join(rel);
            if !abs.is_file() {
                return Err(SceneError::MissingAsset { path: abs });
            }
        }
        frames.push(FrameEntry {
            rgb_ref: f.rgb.clone(),
            depth_ref: f.depth.clone(),
            mask_ref: f.mask.clone(),
            pose,
            fx: f.fx,
        });
    }

    let categories = read_category_sidecar(&root.join(&frames[0].mask_ref))?;

    Ok(VideoManifest {
        video_id: file.video_id,
        source_dataset: file.source_dataset,
        fps: file.fps,
        geometry_provenance: file.geometry_provenance,
        intrinsics: file.intrinsics,
        depth_scale: file.depth_scale,
        pose_convention: file.pose_convention,
        frames,
        root,
        categories,
    })
}

/// Writes a manifest in the on-disk schema. Asset paths are stored as given
/// (relative to the manifest's directory).
pub fn save_manifest(manifest: &VideoManifest, path: &Path) -> Result<(), SceneError> {
    let file = ManifestFile {
        video_id: manifest.video_id.clone(),
        source_dataset: manifest.source_dataset,
        fps: manifest.fps,
        geometry_provenance: manifest.geometry_provenance,
        intrinsics: manifest.intrinsics,
        depth_scale: manifest.depth_scale,
        pose_convention: manifest.pose_convention,
        frames: manifest
            .frames
            .iter()
            .map(|f| FrameFile {
                rgb: f.rgb_ref.clone(),
                depth: f.depth_ref.clone(),
                mask: f.mask_ref.clone(),
                pose: f.pose.to_row_major_3x4().to_vec(),
                fx: f.fx,
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&file).expect("manifest serializes");
    std::fs::write(path, text).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Resamples a manifest to `target_fps` by nearest-time frame selection.
///
/// Videos at or below the target rate are returned unchanged. Selected
/// frames are re-indexed from 0 and the manifest's fps becomes the target,
/// so downstream stages see a uniform clock.
pub fn resample(manifest: &VideoManifest, target_fps: f64) -> VideoManifest {
    assert!(target_fps > 0.0);
    if manifest.fps <= target_fps {
        return manifest.clone();
    }
    let n = manifest.frames.len();
    let duration = (n - 1) as f64 / manifest.fps;
    let mut picked = Vec::new();
    let mut k = 0usize;
    loop {
        let t = k as f64 / target_fps;
        if t > duration + 1e-9 {
            break;
        }
        let src = ((t * manifest.fps).round() as usize).min(n - 1);
        if picked.last() != Some(&src) {
            picked.push(src);
        }
        k += 1;
    }
    let frames = picked.iter().map(|&i| manifest.frames[i].clone()).collect();
    VideoManifest {
        fps: target_fps,
        frames,
        ..manifest.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn toy_manifest_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let scene = synth::ScriptedScene::two_object_demo(30, 42);
        let path = scene.write_to_dir(dir.path()).unwrap();
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.frame_count(), 30);
        assert_eq!(m.fps, 6.0);
        assert_eq!(m.category(1), "car");
    }

    #[test]
    fn missing_depth_asset_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let scene = synth::ScriptedScene::two_object_demo(4, 42);
        let path = scene.write_to_dir(dir.path()).unwrap();
        std::fs::remove_file(dir.path().join("depth/000002.png")).unwrap();
        match load_manifest(&path) {
            Err(SceneError::MissingAsset { path }) => {
                assert!(path.to_string_lossy().contains("000002"))
            }
            other => panic!("expected MissingAsset, got {other:?}"),
        }
    }

    #[test]
    fn single_frame_video_is_degenerate() {
        let dir = tempfile::tempdir().unwrap();
        let scene = synth::ScriptedScene::two_object_demo(2, 42);
        let path = scene.write_to_dir(dir.path()).unwrap();
        // Truncate the manifest to one frame.
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let frames = v["frames"].as_array().unwrap()[..1].to_vec();
        v["frames"] = serde_json::Value::Array(frames);
        std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
        assert!(matches!(
            load_manifest(&path),
            Err(SceneError::DegenerateVideo { frames: 1 })
        ));
    }

    #[test]
    fn resample_30_to_6_fps_takes_every_fifth_frame() {
        let dir = tempfile::tempdir().unwrap();
        let mut scene = synth::ScriptedScene::two_object_demo(30, 42);
        scene.fps = 30.0;
        let path = scene.write_to_dir(dir.path()).unwrap();
        let m = load_manifest(&path).unwrap();
        let r = resample(&m, 6.0);
        assert_eq!(r.fps, 6.0);
        assert_eq!(r.frame_count(), 6);
        assert_eq!(r.frames[1].rgb_ref, m.frames[5].rgb_ref);
    }

    #[test]
    fn resample_at_or_below_target_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let scene = synth::ScriptedScene::two_object_demo(6, 42);
        let path = scene.write_to_dir(dir.path()).unwrap();
        let m = load_manifest(&path).unwrap();
        let r = resample(&m, 6.0);
        assert_eq!(r.frame_count(), m.frame_count());
    }
}
