//! Metric 3D object trajectories from masks, depth, intrinsics, and poses.
//!
//! Per object and frame: mask centroid pixel + median mask depth, lifted
//! through the pinhole model and the camera pose to a world point, smoothed
//! with an exponential moving average, then differenced backward in time for
//! velocity and acceleration. Gaps are never interpolated; differences span
//! the true elapsed time between observed samples.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{
    decode_depth, decode_masks, CameraPose, DepthMap, InstanceMask, Intrinsics, SceneError,
    VideoManifest,
};

/// Default EMA factor: halves single-frame centroid noise while converging
/// on a 1 m/s step within 5 frames at 6 fps.
pub const DEFAULT_ALPHA: f64 = 0.6;

#[derive(Debug, Error)]
pub enum KinematicsError {
    #[error("no valid depth under mask of object {object_id}")]
    NoValidDepth { object_id: u32 },
    #[error("non-positive depth {depth_m} m")]
    NonPositiveDepth { depth_m: f64 },
    #[error("smoothing factor {alpha} outside (0, 1]")]
    AlphaOutOfRange { alpha: f64 },
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// One frame of a trajectory. `position`, `velocity`, and `acceleration`
/// are present only where defined: never on gap frames, and velocity /
/// acceleration additionally need one / two prior observed samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: usize,
    pub time_s: f64,
    pub observed: bool,
    pub position: Option<[f64; 3]>,
    pub velocity: Option<[f64; 3]>,
    pub acceleration: Option<[f64; 3]>,
}

impl TrajectorySample {
    pub fn position_v(&self) -> Option<Vector3<f64>> {
        self.position.map(Vector3::from)
    }
    pub fn velocity_v(&self) -> Option<Vector3<f64>> {
        self.velocity.map(Vector3::from)
    }
    pub fn acceleration_v(&self) -> Option<Vector3<f64>> {
        self.acceleration.map(Vector3::from)
    }
}

/// A reconstructed per-object track. `bbox_size` runs parallel to `samples`
/// and holds the back-projected mask extents in meters where observed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectTrack {
    pub object_id: u32,
    pub category: String,
    pub samples: Vec<TrajectorySample>,
    pub bbox_size: Vec<Option<[f64; 3]>>,
}

impl ObjectTrack {
    /// The sample at frame `t`, if the track covers it.
    pub fn sample_at(&self, t: usize) -> Option<&TrajectorySample> {
        let first = self.samples.first()?.t;
        if t < first {
            return None;
        }
        self.samples.get(t - first).filter(|s| s.t == t)
    }

    pub fn bbox_at(&self, t: usize) -> Option<Vector3<f64>> {
        let first = self.samples.first()?.t;
        if t < first {
            return None;
        }
        self.bbox_size.get(t - first).copied().flatten().map(Vector3::from)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackWarning {
    pub object_id: u32,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackSet {
    pub video_id: String,
    pub fps: f64,
    pub tracks: Vec<ObjectTrack>,
    pub warnings: Vec<TrackWarning>,
}

impl TrackSet {
    pub fn track(&self, object_id: u32) -> Option<&ObjectTrack> {
        self.tracks.iter().find(|t| t.object_id == object_id)
    }
}

/// Mask centroid pixel and robust depth.
///
/// The pixel is the arithmetic mean of mask pixel coordinates; the depth is
/// the median over valid depth values under the mask, so fewer than half the
/// pixels being corrupted cannot move it off a constant surface.
pub fn extract_centroid(
    mask: &InstanceMask,
    depth: &DepthMap,
) -> Result<(Vector2<f64>, f64), KinematicsError> {
    let mut su = 0.0;
    let mut sv = 0.0;
    let mut count = 0usize;
    let mut depths = Vec::new();
    for (u, v) in mask.grid.iter_set() {
        su += f64::from(u);
        sv += f64::from(v);
        count += 1;
        if let Some(d) = depth.get(u, v) {
            depths.push(d);
        }
    }
    debug_assert!(count > 0, "InstanceMask is never empty");
    if depths.is_empty() {
        return Err(KinematicsError::NoValidDepth {
            object_id: mask.object_id,
        });
    }
    let pixel = Vector2::new(su / count as f64, sv / count as f64);
    Ok((pixel, median(&mut depths)))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Lifts a pixel with depth to a world point: camera-frame
/// `((u-cx)·d/fx, (v-cy)·d/fy, d)` mapped through the pose.
pub fn backproject(
    intrinsics: &Intrinsics,
    pose: &CameraPose,
    pixel: Vector2<f64>,
    depth_m: f64,
) -> Result<Vector3<f64>, KinematicsError> {
    if depth_m <= 0.0 {
        return Err(KinematicsError::NonPositiveDepth { depth_m });
    }
    let cam = Vector3::new(
        (pixel.x - intrinsics.cx) * depth_m / intrinsics.fx,
        (pixel.y - intrinsics.cy) * depth_m / intrinsics.fy,
        depth_m,
    );
    Ok(pose.to_world(&cam))
}

/// Forward pinhole projection of a world point: `(pixel, depth)` in the
/// given camera. `None` when the point is not in front of the camera.
pub fn project(
    intrinsics: &Intrinsics,
    pose: &CameraPose,
    world: &Vector3<f64>,
) -> Option<(Vector2<f64>, f64)> {
    let q = pose.to_camera(world);
    if q.z <= 0.0 {
        return None;
    }
    Some((
        Vector2::new(
            intrinsics.fx * q.x / q.z + intrinsics.cx,
            intrinsics.fy * q.y / q.z + intrinsics.cy,
        ),
        q.z,
    ))
}

/// Exponential moving average: `s0 = x0`, `s_t = alpha·x_t + (1-alpha)·s_{t-1}`.
pub fn ema_smooth(
    series: &[Vector3<f64>],
    alpha: f64,
) -> Result<Vec<Vector3<f64>>, KinematicsError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(KinematicsError::AlphaOutOfRange { alpha });
    }
    let mut out = Vec::with_capacity(series.len());
    for (i, x) in series.iter().enumerate() {
        if i == 0 {
            out.push(*x);
        } else {
            out.push(alpha * x + (1.0 - alpha) * out[i - 1]);
        }
    }
    Ok(out)
}

/// Backward differences over observed samples. Input is `(time_s, position)`
/// per observed sample; across gaps the divisor is the true elapsed time.
/// Returns per-sample `(velocity, acceleration)`, `None` where undefined.
#[allow(clippy::type_complexity)]
pub fn differentiate(
    timed: &[(f64, Vector3<f64>)],
) -> (Vec<Option<Vector3<f64>>>, Vec<Option<Vector3<f64>>>) {
    let n = timed.len();
    let mut vel: Vec<Option<Vector3<f64>>> = vec![None; n];
    let mut acc: Vec<Option<Vector3<f64>>> = vec![None; n];
    for i in 1..n {
        let dt = timed[i].0 - timed[i - 1].0;
        debug_assert!(dt > 0.0, "sample times must be strictly increasing");
        vel[i] = Some((timed[i].1 - timed[i - 1].1) / dt);
        if let Some(v_prev) = vel[i - 1] {
            acc[i] = Some((vel[i].unwrap() - v_prev) / dt);
        }
    }
    (vel, acc)
}

/// Reconstructs one track per object appearing in the manifest.
///
/// Pipeline per object: centroid -> backproject -> EMA(positions) ->
/// backward differences. Frames between an object's first and last
/// observation where it is absent (or has no valid depth) become gap
/// samples (`observed = false`). Objects with zero valid-depth frames are
/// dropped with a warning record.
pub fn build_tracks(manifest: &VideoManifest, alpha: f64) -> Result<TrackSet, KinematicsError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(KinematicsError::AlphaOutOfRange { alpha });
    }

    struct Obs {
        t: usize,
        pixel: Vector2<f64>,
        depth_m: f64,
        bbox: [f64; 3],
    }

    let mut per_object: std::collections::BTreeMap<u32, (String, Vec<Obs>)> =
        std::collections::BTreeMap::new();
    let mut warnings = Vec::new();

    for (t, frame) in manifest.frames.iter().enumerate() {
        let depth = decode_depth(&manifest.resolve(&frame.depth_ref), manifest.depth_scale)?;
        let masks = decode_masks(&manifest.resolve(&frame.mask_ref), &manifest.categories)?;
        for mask in masks {
            let entry = per_object
                .entry(mask.object_id)
                .or_insert_with(|| (mask.category.clone(), Vec::new()));
            match extract_centroid(&mask, &depth) {
                Ok((pixel, depth_m)) => {
                    let (umin, vmin, umax, vmax) = mask.grid.bbox().expect("mask non-empty");
                    let bbox = [
                        f64::from(umax - umin) * depth_m / manifest.intrinsics.fx,
                        f64::from(vmax - vmin) * depth_m / manifest.intrinsics.fy,
                        0.0,
                    ];
                    entry.1.push(Obs {
                        t,
                        pixel,
                        depth_m,
                        bbox,
                    });
                }
                Err(KinematicsError::NoValidDepth { object_id }) => {
                    warnings.push(TrackWarning {
                        object_id,
                        detail: format!("frame {t}: mask has no valid depth, recorded as gap"),
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }

    let mut tracks = Vec::new();
    for (object_id, (category, obs)) in per_object {
        if obs.is_empty() {
            warnings.push(TrackWarning {
                object_id,
                detail: "dropped: no frame with valid depth".into(),
            });
            continue;
        }

        let world: Vec<Vector3<f64>> = obs
            .iter()
            .map(|o| {
                backproject(
                    &manifest.intrinsics,
                    &manifest.frames[o.t].pose,
                    o.pixel,
                    o.depth_m,
                )
            })
            .collect::<Result<_, _>>()?;
        let smoothed = ema_smooth(&world, alpha)?;
        let timed: Vec<(f64, Vector3<f64>)> = obs
            .iter()
            .zip(smoothed.iter())
            .map(|(o, p)| (manifest.frame_time(o.t), *p))
            .collect();
        let (vel, acc) = differentiate(&timed);

        let first = obs[0].t;
        let last = obs[obs.len() - 1].t;
        let mut samples = Vec::with_capacity(last - first + 1);
        let mut bbox_size = Vec::with_capacity(last - first + 1);
        let mut k = 0usize; // index into obs
        for t in first..=last {
            if k < obs.len() && obs[k].t == t {
                samples.push(TrajectorySample {
                    t,
                    time_s: manifest.frame_time(t),
                    observed: true,
                    position: Some(smoothed[k].into()),
                    velocity: vel[k].map(Into::into),
                    acceleration: acc[k].map(Into::into),
                });
                bbox_size.push(Some(obs[k].bbox));
                k += 1;
            } else {
                samples.push(TrajectorySample {
                    t,
                    time_s: manifest.frame_time(t),
                    observed: false,
                    position: None,
                    velocity: None,
                    acceleration: None,
                });
                bbox_size.push(None);
            }
        }
        tracks.push(ObjectTrack {
            object_id,
            category,
            samples,
            bbox_size,
        });
    }

    Ok(TrackSet {
        video_id: manifest.video_id.clone(),
        fps: manifest.fps,
        tracks,
        warnings,
    })
}

/// Writes one JSON record per object: the track-export interface.
pub fn export_tracks(tracks: &TrackSet, path: &std::path::Path) -> std::io::Result<()> {
    let mut out = String::new();
    for track in &tracks.tracks {
        out.push_str(&serde_json::to_string(track).expect("track serializes"));
        out.push('\n');
    }
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{MaskGrid, PoseConvention};
    use approx::assert_relative_eq;
    use nalgebra::Matrix3;
    use proptest::prelude::*;

    fn mask_at(pixels: &[(u32, u32)], w: u32, h: u32) -> InstanceMask {
        let mut grid = MaskGrid::empty(w, h);
        for &(u, v) in pixels {
            grid.set(u, v, true);
        }
        InstanceMask::new(1, "car", grid).unwrap()
    }

    fn depth_of(values: &[(u32, u32, f32)], w: u32, h: u32) -> DepthMap {
        let mut meters = vec![0.0f32; (w * h) as usize];
        for &(u, v, d) in values {
            meters[(v * w + u) as usize] = d;
        }
        DepthMap::from_meters(w, h, meters, 0.001)
    }

    #[test]
    fn centroid_of_uniform_square() {
        let mask = mask_at(&[(10, 10), (10, 11), (11, 10), (11, 11)], 32, 32);
        let depth = depth_of(
            &[(10, 10, 3.0), (10, 11, 3.0), (11, 10, 3.0), (11, 11, 3.0)],
            32,
            32,
        );
        let (pixel, d) = extract_centroid(&mask, &depth).unwrap();
        assert_relative_eq!(pixel, nalgebra::Vector2::new(10.5, 10.5), epsilon = 1e-12);
        assert_relative_eq!(d, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn centroid_depth_is_median_robust_to_outlier() {
        // depths {1,1,1,100}: the median ignores the outlier.
        let mask = mask_at(&[(0, 0), (1, 0), (2, 0), (3, 0)], 4, 1);
        let depth = depth_of(&[(0, 0, 1.0), (1, 0, 1.0), (2, 0, 1.0), (3, 0, 100.0)], 4, 1);
        let (_, d) = extract_centroid(&mask, &depth).unwrap();
        assert_relative_eq!(d, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn centroid_over_invalid_depth_errors() {
        let mask = mask_at(&[(0, 0), (1, 0)], 2, 1);
        let depth = DepthMap::from_meters(2, 1, vec![0.0, f32::NAN], 0.001);
        assert!(matches!(
            extract_centroid(&mask, &depth),
            Err(KinematicsError::NoValidDepth { object_id: 1 })
        ));
    }

    #[test]
    fn backproject_identity_axis() {
        let intr = Intrinsics {
            fx: 1.0,
            fy: 1.0,
            cx: 0.0,
            cy: 0.0,
            width: 10,
            height: 10,
        };
        let pose = CameraPose::identity(PoseConvention::WorldFromCamera);
        let p = backproject(&intr, &pose, nalgebra::Vector2::new(0.0, 0.0), 2.0).unwrap();
        assert_relative_eq!(p, Vector3::new(0.0, 0.0, 2.0), epsilon = 1e-12);
    }

    #[test]
    fn backproject_offset_pixel() {
        // Independently: (420-320)*5/500 = 1.0, (240-240)*5/500 = 0, z = 5.
        let intr = Intrinsics {
            fx: 500.0,
            fy: 500.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
        };
        let pose = CameraPose::identity(PoseConvention::WorldFromCamera);
        let p = backproject(&intr, &pose, nalgebra::Vector2::new(420.0, 240.0), 5.0).unwrap();
        assert_relative_eq!(p, Vector3::new(1.0, 0.0, 5.0), epsilon = 1e-12);
    }

    #[test]
    fn backproject_translated_camera() {
        // Camera translated to (0,0,-5), world_from_camera: world = cam + t.
        let intr = Intrinsics {
            fx: 500.0,
            fy: 500.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
        };
        let pose = CameraPose::new(
            Matrix3::identity(),
            Vector3::new(0.0, 0.0, -5.0),
            PoseConvention::WorldFromCamera,
        )
        .unwrap();
        let p = backproject(&intr, &pose, nalgebra::Vector2::new(420.0, 240.0), 5.0).unwrap();
        assert_relative_eq!(p, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn backproject_rejects_non_positive_depth() {
        let intr = Intrinsics {
            fx: 1.0,
            fy: 1.0,
            cx: 0.0,
            cy: 0.0,
            width: 4,
            height: 4,
        };
        let pose = CameraPose::identity(PoseConvention::WorldFromCamera);
        assert!(matches!(
            backproject(&intr, &pose, nalgebra::Vector2::new(0.0, 0.0), 0.0),
            Err(KinematicsError::NonPositiveDepth { .. })
        ));
    }

    #[test]
    fn ema_alpha_one_is_identity() {
        let xs = vec![
            Vector3::new(0.0, 1.0, 2.0),
            Vector3::new(3.0, -1.0, 0.5),
            Vector3::new(-2.0, 0.0, 0.0),
        ];
        assert_eq!(ema_smooth(&xs, 1.0).unwrap(), xs);
    }

    #[test]
    fn ema_constant_series_is_fixed_point() {
        let xs = vec![Vector3::new(1.0, 2.0, 3.0); 5];
        for alpha in [0.1, 0.5, 0.9] {
            let s = ema_smooth(&xs, alpha).unwrap();
            for v in s {
                assert_relative_eq!(v, xs[0], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ema_hand_recursion() {
        // x = (0, 1, 1), alpha 0.5 -> s = (0, 0.5, 0.75)
        let xs = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
        ];
        let s = ema_smooth(&xs, 0.5).unwrap();
        assert_relative_eq!(s[0].x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(s[1].x, 0.5, epsilon = 1e-15);
        assert_relative_eq!(s[2].x, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn ema_rejects_bad_alpha() {
        let xs = vec![Vector3::zeros()];
        assert!(matches!(
            ema_smooth(&xs, 0.0),
            Err(KinematicsError::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            ema_smooth(&xs, 1.5),
            Err(KinematicsError::AlphaOutOfRange { .. })
        ));
    }

    #[test]
    fn differentiate_static_positions() {
        let timed: Vec<(f64, Vector3<f64>)> = (0..4)
            .map(|t| (t as f64 / 6.0, Vector3::new(2.0, 0.0, 5.0)))
            .collect();
        let (vel, _) = differentiate(&timed);
        for v in vel.iter().skip(1) {
            assert_relative_eq!(v.unwrap(), Vector3::zeros(), epsilon = 1e-15);
        }
    }

    #[test]
    fn differentiate_uniform_steps() {
        // x = 0, 0.5, 1.0 m at 6 fps -> v = 3 m/s at samples 1,2; a = 0 at 2.
        let timed = vec![
            (0.0, Vector3::new(0.0, 0.0, 0.0)),
            (1.0 / 6.0, Vector3::new(0.5, 0.0, 0.0)),
            (2.0 / 6.0, Vector3::new(1.0, 0.0, 0.0)),
        ];
        let (vel, acc) = differentiate(&timed);
        assert!(vel[0].is_none() && acc[0].is_none() && acc[1].is_none());
        assert_relative_eq!(vel[1].unwrap(), Vector3::new(3.0, 0.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(vel[2].unwrap(), Vector3::new(3.0, 0.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(acc[2].unwrap(), Vector3::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn differentiate_across_gap_uses_elapsed_time() {
        // Samples at t=0 (x=0) and t=3 (x=1.5): dt = 0.5 s -> v = 3 m/s.
        let timed = vec![
            (0.0, Vector3::new(0.0, 0.0, 0.0)),
            (0.5, Vector3::new(1.5, 0.0, 0.0)),
        ];
        let (vel, _) = differentiate(&timed);
        assert_relative_eq!(vel[1].unwrap(), Vector3::new(3.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn differentiate_affine_path_is_exact() {
        let b = Vector3::new(0.7, -0.3, 0.2);
        let a = Vector3::new(1.0, 2.0, 3.0);
        let timed: Vec<(f64, Vector3<f64>)> =
            (0..20).map(|t| (t as f64 / 6.0, a + b * (t as f64 / 6.0))).collect();
        let (vel, acc) = differentiate(&timed);
        for v in vel.iter().skip(1) {
            assert!((v.unwrap() - b).norm() < 1e-12);
        }
        for g in acc.iter().skip(2) {
            assert!(g.unwrap().norm() < 1e-12);
        }
    }

    proptest! {
        /// project(backproject(...)) = identity for random valid inputs.
        #[test]
        fn backproject_then_project_roundtrips(
            u in 0.0..640.0f64,
            v in 0.0..480.0f64,
            d in 0.1..50.0f64,
            angle in -3.0..3.0f64,
            tx in -5.0..5.0f64,
        ) {
            let intr = Intrinsics { fx: 480.0, fy: 520.0, cx: 321.5, cy: 239.5, width: 640, height: 480 };
            let (s, c) = angle.sin_cos();
            let rot = Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c);
            let pose = CameraPose::new(rot, Vector3::new(tx, 0.5, -1.0), PoseConvention::WorldFromCamera).unwrap();
            let world = backproject(&intr, &pose, nalgebra::Vector2::new(u, v), d).unwrap();
            let (px, depth) = project(&intr, &pose, &world).unwrap();
            prop_assert!((px.x - u).abs() < 1e-9 * u.max(1.0));
            prop_assert!((px.y - v).abs() < 1e-9 * v.max(1.0));
            prop_assert!((depth - d).abs() < 1e-9 * d);
        }

        /// EMA output stays inside the coordinate-wise convex hull of inputs.
        #[test]
        fn ema_stays_in_convex_hull(
            xs in proptest::collection::vec(-100.0..100.0f64, 1..40),
            alpha in 0.01..=1.0f64,
        ) {
            let series: Vec<Vector3<f64>> = xs.iter().map(|x| Vector3::new(*x, 0.0, 0.0)).collect();
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for s in ema_smooth(&series, alpha).unwrap() {
                prop_assert!(s.x >= lo - 1e-9 && s.x <= hi + 1e-9);
            }
        }
    }
}
