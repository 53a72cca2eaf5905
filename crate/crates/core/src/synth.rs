//! Scripted synthetic scenes.
//!
//! Scenes are defined analytically (object centers, constant velocities,
//! camera poses), then rasterized to the same RGB / depth / indexed-mask
//! assets a real video would provide. Ground truth stays available from the
//! script, so reconstruction can be checked end to end against values the
//! pipeline never saw.
//!
//! The rasterizer does its own pinhole projection on purpose: it must not
//! share code with the geometry it is used to test.

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use std::path::{Path, PathBuf};

use crate::filter::{DiagnosticVector, GrayFrame, DIAGNOSTIC_QUESTION_COUNT};
use crate::scene::{
    save_manifest, CameraPose, FrameEntry, GeometryProvenance, Intrinsics, PoseConvention,
    SceneError, SourceDataset, VideoManifest,
};
use crate::seed::derive_seed;

#[derive(Debug, Clone)]
pub struct ScriptedObject {
    pub object_id: u32,
    pub category: String,
    /// World position at t = 0.
    pub start: Vector3<f64>,
    /// Constant world velocity in m/s.
    pub velocity: Vector3<f64>,
    /// Rendered as a flat disk of this radius facing the camera.
    pub radius_m: f64,
    /// Frames where the object is withheld from rendering (occlusion).
    pub hidden_frames: Vec<usize>,
    pub color: [u8; 3],
}

#[derive(Debug, Clone)]
pub struct ScriptedScene {
    pub video_id: String,
    pub intrinsics: Intrinsics,
    pub fps: f64,
    pub n_frames: usize,
    pub objects: Vec<ScriptedObject>,
    /// One pose per frame, world-from-camera.
    pub camera: Vec<CameraPose>,
    pub background_depth_m: f64,
    /// Per-axis uniform jitter bound on rendered object centers, in meters.
    pub center_noise_m: f64,
    pub seed: u64,
    pub source: SourceDataset,
}

pub struct RenderedFrame {
    pub depth_m: Vec<f32>,
    pub mask_ids: Vec<u8>,
    pub rgb: image::RgbImage,
}

impl ScriptedScene {
    /// Object `A` (car) at (0, 0, 5) moving 1 m/s along +x, static object
    /// `B` (person). Static camera at the world origin, 6 fps.
    pub fn two_object_demo(n_frames: usize, seed: u64) -> Self {
        let intrinsics = Intrinsics {
            fx: 300.0,
            fy: 300.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
        };
        Self {
            video_id: "scripted_demo".into(),
            intrinsics,
            fps: 6.0,
            n_frames,
            objects: vec![
                ScriptedObject {
                    object_id: 1,
                    category: "car".into(),
                    start: Vector3::new(0.0, 0.0, 5.0),
                    velocity: Vector3::new(1.0, 0.0, 0.0),
                    radius_m: 0.18,
                    hidden_frames: vec![],
                    color: [200, 40, 40],
                },
                ScriptedObject {
                    object_id: 2,
                    category: "person".into(),
                    start: Vector3::new(-1.0, 1.2, 6.0),
                    velocity: Vector3::zeros(),
                    radius_m: 0.18,
                    hidden_frames: vec![],
                    color: [40, 90, 200],
                },
            ],
            camera: vec![CameraPose::identity(PoseConvention::WorldFromCamera); n_frames],
            background_depth_m: 12.0,
            center_noise_m: 0.0,
            seed,
            source: SourceDataset::PointOdyssey,
        }
    }

    /// The demo scene with +/-1 cm center jitter per axis.
    pub fn noisy_constant_velocity(n_frames: usize, seed: u64) -> Self {
        let mut scene = Self::two_object_demo(n_frames, seed);
        scene.video_id = "scripted_noisy".into();
        scene.center_noise_m = 0.01;
        scene
    }

    /// Object `A` overtakes static object `B` along +x with a 1.5 m lateral
    /// offset: the pair approaches, holds a near-zero closing band for a few
    /// frames around the pass, then recedes.
    pub fn overtake(n_frames: usize, seed: u64) -> Self {
        let mut scene = Self::two_object_demo(n_frames, seed);
        scene.video_id = "scripted_overtake".into();
        scene.objects = vec![
            ScriptedObject {
                object_id: 1,
                category: "car".into(),
                start: Vector3::new(-1.2, -0.75, 8.0),
                velocity: Vector3::new(0.5, 0.0, 0.0),
                radius_m: 0.25,
                hidden_frames: vec![],
                color: [200, 40, 40],
            },
            ScriptedObject {
                object_id: 2,
                category: "cyclist".into(),
                start: Vector3::new(0.0, 0.75, 8.0),
                velocity: Vector3::zeros(),
                radius_m: 0.25,
                hidden_frames: vec![],
                color: [40, 180, 90],
            },
        ];
        scene
    }

    /// A clip whose motion content scales with `level` in 0..=5: `level`
    /// moving objects at speeds proportional to the level. Level 0 is fully
    /// static.
    pub fn planted_dynamism(level: u32, index: u32, n_frames: usize, seed: u64) -> Self {
        assert!(level <= 5);
        let intrinsics = Intrinsics {
            fx: 70.0,
            fy: 70.0,
            cx: 48.0,
            cy: 32.0,
            width: 96,
            height: 64,
        };
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(seed, "planted", u64::from(level) << 16 | u64::from(index)));
        let mut objects = Vec::new();
        for i in 0..level {
            let dir = if i % 2 == 0 { 1.0 } else { -1.0 };
            let speed = 0.25 * f64::from(level) * (0.8 + 0.4 * rng.random::<f64>());
            let z = 4.0 + rng.random::<f64>() * 3.0;
            let y = -0.8 + 1.6 * f64::from(i) / 5.0;
            objects.push(ScriptedObject {
                object_id: i + 1,
                category: "blob".into(),
                start: Vector3::new(-dir * speed * (n_frames as f64 / 6.0) / 2.0, y, z),
                velocity: Vector3::new(dir * speed, 0.0, 0.0),
                radius_m: 0.30,
                hidden_frames: vec![],
                color: [rng.random(), rng.random(), rng.random()],
            });
        }
        Self {
            video_id: format!("planted_k{level}_{index}"),
            intrinsics,
            fps: 6.0,
            n_frames,
            objects,
            camera: vec![CameraPose::identity(PoseConvention::WorldFromCamera); n_frames],
            background_depth_m: 12.0,
            center_noise_m: 0.0,
            seed: derive_seed(seed, "planted-noise", u64::from(level) << 16 | u64::from(index)),
            source: SourceDataset::SaV,
        }
    }

    pub fn time(&self, t: usize) -> f64 {
        t as f64 / self.fps
    }

    /// Noiseless ground-truth world position.
    pub fn true_position(&self, object_id: u32, t: usize) -> Vector3<f64> {
        let obj = self
            .objects
            .iter()
            .find(|o| o.object_id == object_id)
            .expect("unknown object id");
        obj.start + obj.velocity * self.time(t)
    }

    /// The world center actually rendered at frame `t`: ground truth plus
    /// seeded jitter of magnitude at most `center_noise_m` (uniform
    /// magnitude, uniform direction).
    pub fn rendered_center(&self, object_id: u32, t: usize) -> Vector3<f64> {
        let truth = self.true_position(object_id, t);
        if self.center_noise_m == 0.0 {
            return truth;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
            self.seed,
            "center-noise",
            (t as u64) << 16 | u64::from(object_id),
        ));
        let direction = loop {
            let v = Vector3::new(
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            );
            let norm = v.norm();
            if norm > 1e-3 && norm <= 1.0 {
                break v / norm;
            }
        };
        truth + direction * (rng.random::<f64>() * self.center_noise_m)
    }

    fn background_rgb(&self) -> Vec<[u8; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, "texture", 0));
        let n = (self.intrinsics.width as usize) * (self.intrinsics.height as usize);
        (0..n)
            .map(|_| {
                let g: u8 = rng.random_range(60..200);
                [g, g, g]
            })
            .collect()
    }

    pub fn render_frame(&self, t: usize) -> RenderedFrame {
        let w = self.intrinsics.width;
        let h = self.intrinsics.height;
        let n = (w as usize) * (h as usize);
        let mut depth = vec![self.background_depth_m as f32; n];
        let mut ids = vec![0u8; n];
        let mut rgb = self.background_rgb();
        let pose = &self.camera[t];

        for obj in &self.objects {
            if obj.hidden_frames.contains(&t) {
                continue;
            }
            let center = self.rendered_center(obj.object_id, t);
            let q = pose.to_camera(&center);
            if q.z <= 0.1 {
                continue;
            }
            let u0 = self.intrinsics.fx * q.x / q.z + self.intrinsics.cx;
            let v0 = self.intrinsics.fy * q.y / q.z + self.intrinsics.cy;
            let r_px = obj.radius_m * self.intrinsics.fx / q.z;
            let umin = (u0 - r_px).floor().max(0.0) as u32;
            let umax = (u0 + r_px).ceil().min(f64::from(w - 1)) as u32;
            let vmin = (v0 - r_px).floor().max(0.0) as u32;
            let vmax = (v0 + r_px).ceil().min(f64::from(h - 1)) as u32;
            for v in vmin..=vmax {
                for u in umin..=umax {
                    let du = f64::from(u) - u0;
                    let dv = f64::from(v) - v0;
                    if du * du + dv * dv > r_px * r_px {
                        continue;
                    }
                    let i = (v as usize) * (w as usize) + (u as usize);
                    if (q.z as f32) < depth[i] {
                        depth[i] = q.z as f32;
                        ids[i] = obj.object_id as u8;
                        rgb[i] = obj.color;
                    }
                }
            }
        }

        let mut img = image::RgbImage::new(w, h);
        for (i, px) in rgb.iter().enumerate() {
            img.put_pixel((i as u32) % w, (i as u32) / w, image::Rgb(*px));
        }
        RenderedFrame {
            depth_m: depth,
            mask_ids: ids,
            rgb: img,
        }
    }

    /// Luma frames for motion-feature extraction, without touching disk.
    pub fn gray_frames(&self) -> Vec<GrayFrame> {
        (0..self.n_frames)
            .map(|t| {
                let f = self.render_frame(t);
                GrayFrame::from_rgb(&f.rgb)
            })
            .collect()
    }

    /// Rasterizes every frame and writes the standard asset layout plus the
    /// manifest. Returns the manifest path.
    pub fn write_to_dir(&self, dir: &Path) -> Result<PathBuf, SceneError> {
        let io_err = |path: &Path, e: std::io::Error| SceneError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        for sub in ["rgb", "depth", "mask"] {
            let p = dir.join(sub);
            std::fs::create_dir_all(&p).map_err(|e| io_err(&p, e))?;
        }
        let depth_scale = 0.001;
        let mut frames = Vec::with_capacity(self.n_frames);
        for t in 0..self.n_frames {
            let rendered = self.render_frame(t);
            let rgb_rel = PathBuf::from(format!("rgb/{t:06}.png"));
            let depth_rel = PathBuf::from(format!("depth/{t:06}.png"));
            let mask_rel = PathBuf::from(format!("mask/{t:06}.png"));

            rendered
                .rgb
                .save(dir.join(&rgb_rel))
                .map_err(|e| io_err(&dir.join(&rgb_rel), std::io::Error::other(e)))?;

            let stored: Vec<u16> = rendered
                .depth_m
                .iter()
                .map(|m| (f64::from(*m) / depth_scale).round().clamp(0.0, 65535.0) as u16)
                .collect();
            image::ImageBuffer::<image::Luma<u16>, _>::from_raw(
                self.intrinsics.width,
                self.intrinsics.height,
                stored,
            )
            .unwrap()
            .save(dir.join(&depth_rel))
            .map_err(|e| io_err(&dir.join(&depth_rel), std::io::Error::other(e)))?;

            crate::scene::mask::encode_mask_image(
                &dir.join(&mask_rel),
                self.intrinsics.width,
                self.intrinsics.height,
                &rendered.mask_ids,
            )?;

            frames.push(FrameEntry {
                rgb_ref: rgb_rel,
                depth_ref: depth_rel,
                mask_ref: mask_rel,
                pose: self.camera[t].clone(),
                fx: None,
            });
        }

        let categories: std::collections::BTreeMap<String, String> = self
            .objects
            .iter()
            .map(|o| (o.object_id.to_string(), o.category.clone()))
            .collect();
        let sidecar = dir.join("mask").join(crate::scene::CATEGORY_SIDECAR);
        std::fs::write(&sidecar, serde_json::to_string_pretty(&categories).unwrap())
            .map_err(|e| io_err(&sidecar, e))?;

        let manifest = VideoManifest {
            video_id: self.video_id.clone(),
            source_dataset: self.source,
            fps: self.fps,
            geometry_provenance: GeometryProvenance::GroundTruth,
            intrinsics: self.intrinsics,
            depth_scale,
            pose_convention: PoseConvention::WorldFromCamera,
            frames,
            root: dir.to_path_buf(),
            categories: self
                .objects
                .iter()
                .map(|o| (o.object_id, o.category.clone()))
                .collect(),
        };
        let path = dir.join("manifest.json");
        save_manifest(&manifest, &path)?;
        Ok(path)
    }
}

/// Diagnostic answers correlated with a planted dynamism level: motion
/// questions scale with `level / 5`, the rest sit near 0.5.
pub fn planted_diagnostics(level: u32, seed: u64) -> DiagnosticVector {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "diag", u64::from(level)));
    let base = f64::from(level) / 5.0;
    let answers: Vec<f64> = (0..DIAGNOSTIC_QUESTION_COUNT)
        .map(|q| {
            let v = if q % 3 == 2 {
                0.5 + rng.random_range(-0.05..=0.05)
            } else {
                base + rng.random_range(-0.1..=0.1)
            };
            v.clamp(0.0, 1.0)
        })
        .collect();
    DiagnosticVector::new(answers).expect("synthetic answers are in range")
}

/// A horizontally panning window over a static textured strip: every frame
/// shifts `dx_px` to the right, so true block motion is exactly `dx_px`.
pub fn pan_frames(width: u32, height: u32, n_frames: usize, dx_px: u32, seed: u64) -> Vec<GrayFrame> {
    let strip_w = (width as usize) + dx_px as usize * n_frames;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "pan", 0));
    let strip: Vec<u8> = (0..strip_w * height as usize).map(|_| rng.random()).collect();
    (0..n_frames)
        .map(|f| {
            let off = f * dx_px as usize;
            let mut data = Vec::with_capacity((width as usize) * (height as usize));
            for v in 0..height as usize {
                let row = &strip[v * strip_w..(v + 1) * strip_w];
                data.extend_from_slice(&row[off..off + width as usize]);
            }
            GrayFrame {
                width,
                height,
                data,
            }
        })
        .collect()
}
