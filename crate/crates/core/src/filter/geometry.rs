//! Geometric stability features over time.

use nalgebra::{Matrix3, Vector3};

use super::FilterError;
use crate::scene::{decode_depth, VideoManifest};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GeometricFeatures {
    /// Mean per-pixel |depth change| between consecutive frames, meters,
    /// over pixels valid in both frames.
    pub depth_continuity: f64,
    /// Relative standard deviation of the focal length across frames.
    /// Zero when the manifest carries no per-frame focal estimates.
    pub focal_stability: f64,
    /// Mean angular acceleration of the camera orientation, deg/s^2.
    pub rotation_accel_deg_s2: f64,
    /// Mean magnitude of translational jerk of the camera center, m/s^3.
    pub translation_jerk_m_s3: f64,
    /// Largest single-step camera rotation, degrees. Gate input.
    pub max_rotation_step_deg: f64,
}

impl GeometricFeatures {
    pub fn as_vector(&self) -> [f64; 5] {
        [
            self.depth_continuity,
            self.focal_stability,
            self.rotation_accel_deg_s2,
            self.translation_jerk_m_s3,
            self.max_rotation_step_deg,
        ]
    }

    pub fn names() -> [&'static str; 5] {
        [
            "depth_continuity",
            "focal_stability",
            "rotation_accel_deg_s2",
            "translation_jerk_m_s3",
            "max_rotation_step_deg",
        ]
    }
}

/// Evaluates geometric stability across the video. All components are zero
/// for a perfectly static, consistently calibrated camera.
pub fn geometric_features(manifest: &VideoManifest) -> Result<GeometricFeatures, FilterError> {
    let dt = 1.0 / manifest.fps;

    let mut prev = decode_depth(
        &manifest.resolve(&manifest.frames[0].depth_ref),
        manifest.depth_scale,
    )?;
    let mut depth_sums = Vec::new();
    for frame in &manifest.frames[1..] {
        let cur = decode_depth(&manifest.resolve(&frame.depth_ref), manifest.depth_scale)?;
        let mut sum = 0.0;
        let mut n = 0usize;
        for (u, v, d) in cur.iter_valid() {
            if let Some(p) = prev.get(u, v) {
                sum += (d - p).abs();
                n += 1;
            }
        }
        depth_sums.push(if n == 0 { 0.0 } else { sum / n as f64 });
        prev = cur;
    }
    let depth_continuity = mean(&depth_sums);

    let focals: Vec<f64> = manifest
        .frames
        .iter()
        .map(|f| f.fx.unwrap_or(manifest.intrinsics.fx))
        .collect();
    let focal_stability = relative_std(&focals);

    let rotations: Vec<Matrix3<f64>> = manifest
        .frames
        .iter()
        .map(|f| f.pose.as_world_from_camera().0)
        .collect();
    let centers: Vec<Vector3<f64>> = manifest
        .frames
        .iter()
        .map(|f| f.pose.camera_center_world())
        .collect();

    let step_angles_deg: Vec<f64> = rotations
        .windows(2)
        .map(|w| rotation_angle_deg(&(w[1] * w[0].transpose())))
        .collect();
    let max_rotation_step_deg = step_angles_deg.iter().cloned().fold(0.0, f64::max);
    let angular_rates: Vec<f64> = step_angles_deg.iter().map(|a| a / dt).collect();
    let rotation_accel_deg_s2 = mean(
        &angular_rates
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() / dt)
            .collect::<Vec<_>>(),
    );

    let velocities: Vec<Vector3<f64>> = centers.windows(2).map(|w| (w[1] - w[0]) / dt).collect();
    let accels: Vec<Vector3<f64>> = velocities.windows(2).map(|w| (w[1] - w[0]) / dt).collect();
    let jerks: Vec<f64> = accels
        .windows(2)
        .map(|w| ((w[1] - w[0]) / dt).norm())
        .collect();
    let translation_jerk_m_s3 = mean(&jerks);

    Ok(GeometricFeatures {
        depth_continuity,
        focal_stability,
        rotation_accel_deg_s2,
        translation_jerk_m_s3,
        max_rotation_step_deg,
    })
}

fn rotation_angle_deg(r: &Matrix3<f64>) -> f64 {
    let c = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn relative_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    if m.abs() < 1e-12 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    var.sqrt() / m.abs()
}
