//! Per-frame inter-object motion relations and camera-relative directions.
//!
//! The closing speed between two objects is the negative time-derivative of
//! their distance; its thresholded sign yields approaching / receding /
//! parallel. Camera-relative direction comes from azimuth and elevation in
//! the x-right, y-down, z-forward camera frame. Raw labels are debounced
//! (a change must persist two consecutive frames) before feeding narrative
//! text, so the `stable_relation` field can lag `relation` by design.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::TrackSet;
use crate::scene::{CameraPose, VideoManifest};

/// Default closing-speed band for the `parallel` class, in m/s. Absorbs the
/// centroid jitter produced by ~1 cm depth noise at 6 fps.
pub const DEFAULT_EPS_REL: f64 = 0.05;

/// |elevation| at or above this refines a direction with above/below.
pub const ELEVATION_REFINE_DEG: f64 = 30.0;

#[derive(Debug, Error)]
pub enum RelationError {
    #[error("objects are coincident (zero separation)")]
    Coincident,
    #[error("point at the camera center")]
    AtCameraCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Approaching,
    Receding,
    Parallel,
}

impl Relation {
    pub fn label(self) -> &'static str {
        match self {
            Relation::Approaching => "approaching",
            Relation::Receding => "receding",
            Relation::Parallel => "parallel",
        }
    }
}

/// Azimuth quadrant labels, half-open sectors:
/// front `[-45°, 45°)`, right `[45°, 135°)`, back `[135°, 180°] ∪ (-180°, -135°)`,
/// left `[-135°, -45°)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Front,
    Right,
    Back,
    Left,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Front => "front",
            Direction::Right => "right",
            Direction::Back => "back",
            Direction::Left => "left",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerticalRefinement {
    Above,
    Below,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationSample {
    pub t: usize,
    /// Object ids with `pair.0 < pair.1`.
    pub pair: (u32, u32),
    pub distance_m: f64,
    /// Positive while the distance is shrinking.
    pub closing_speed: f64,
    /// Thresholded sign of `closing_speed` at this frame.
    pub relation: Relation,
    /// Debounced label: changes only after the raw label persists two
    /// consecutive frames.
    pub stable_relation: Relation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionSample {
    pub t: usize,
    pub object_id: u32,
    /// Degrees in (-180, 180], 0 = optical axis, positive to the right.
    pub azimuth_deg: f64,
    /// Degrees in [-90, 90], positive above the horizon.
    pub elevation_deg: f64,
    /// Distance from the camera center in meters.
    pub range_m: f64,
    pub direction: Direction,
    pub vertical: Option<VerticalRefinement>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RelationTimeline {
    pub eps_rel: f64,
    pub relations: Vec<RelationSample>,
    pub directions: Vec<DirectionSample>,
    pub warnings: Vec<String>,
}

impl RelationTimeline {
    /// Relation samples for one pair, in frame order.
    pub fn pair_series(&self, a: u32, b: u32) -> Vec<&RelationSample> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.relations.iter().filter(|r| r.pair == key).collect()
    }

    pub fn directions_at(&self, t: usize) -> impl Iterator<Item = &DirectionSample> {
        self.directions.iter().filter(move |d| d.t == t)
    }

    pub fn relations_at(&self, t: usize) -> impl Iterator<Item = &RelationSample> {
        self.relations.iter().filter(move |r| r.t == t)
    }

    /// All pair keys present anywhere in the timeline, sorted.
    pub fn pairs(&self) -> Vec<(u32, u32)> {
        let mut keys: Vec<_> = self.relations.iter().map(|r| r.pair).collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }
}

/// `-d/dt ||pos_b - pos_a||`: positive when the objects are closing.
/// Coincident positions have no defined direction; the rate is 0 there.
pub fn closing_speed(
    pos_a: &Vector3<f64>,
    pos_b: &Vector3<f64>,
    vel_a: &Vector3<f64>,
    vel_b: &Vector3<f64>,
) -> Result<f64, RelationError> {
    let dp = pos_b - pos_a;
    let dist = dp.norm();
    if dist < 1e-12 {
        return Err(RelationError::Coincident);
    }
    Ok(-dp.dot(&(vel_b - vel_a)) / dist)
}

/// Thresholded sign: approaching above `+eps`, receding below `-eps`,
/// parallel inside the band.
pub fn classify_relation(closing: f64, eps_rel: f64) -> Relation {
    debug_assert!(eps_rel >= 0.0);
    if closing > eps_rel {
        Relation::Approaching
    } else if closing < -eps_rel {
        Relation::Receding
    } else {
        Relation::Parallel
    }
}

/// Azimuth/elevation of a world point in the camera frame, plus its sector
/// label. Convention: x right, y down, z forward; azimuth `atan2(x, z)`,
/// elevation `atan2(-y, sqrt(x^2 + z^2))`.
pub fn camera_direction(
    pose: &CameraPose,
    world_point: &Vector3<f64>,
) -> Result<(f64, f64, f64, Direction, Option<VerticalRefinement>), RelationError> {
    let q = pose.to_camera(world_point);
    let range = q.norm();
    if range < 1e-12 {
        return Err(RelationError::AtCameraCenter);
    }
    let azimuth = q.x.atan2(q.z).to_degrees();
    let elevation = (-q.y).atan2((q.x * q.x + q.z * q.z).sqrt()).to_degrees();
    Ok((
        azimuth,
        elevation,
        range,
        sector(azimuth),
        vertical_refinement(elevation),
    ))
}

/// Total map from azimuth to a sector; boundaries belong to the
/// counter-clockwise-next sector via half-open intervals.
pub fn sector(azimuth_deg: f64) -> Direction {
    debug_assert!((-180.0..=180.0).contains(&azimuth_deg));
    if (-45.0..45.0).contains(&azimuth_deg) {
        Direction::Front
    } else if (45.0..135.0).contains(&azimuth_deg) {
        Direction::Right
    } else if (-135.0..-45.0).contains(&azimuth_deg) {
        Direction::Left
    } else {
        Direction::Back
    }
}

pub fn vertical_refinement(elevation_deg: f64) -> Option<VerticalRefinement> {
    if elevation_deg >= ELEVATION_REFINE_DEG {
        Some(VerticalRefinement::Above)
    } else if elevation_deg <= -ELEVATION_REFINE_DEG {
        Some(VerticalRefinement::Below)
    } else {
        None
    }
}

/// Builds the full per-frame timeline from reconstructed tracks.
///
/// A pair is covered at frame `t` once both objects are observed with
/// defined velocities; every observed object gets a direction sample per
/// frame. Relations use the smoothed kinematics from the tracks.
pub fn infer_timeline(
    tracks: &TrackSet,
    manifest: &VideoManifest,
    eps_rel: f64,
) -> RelationTimeline {
    let mut timeline = RelationTimeline {
        eps_rel,
        ..Default::default()
    };

    for (t, frame) in manifest.frames.iter().enumerate() {
        for track in &tracks.tracks {
            let Some(sample) = track.sample_at(t) else {
                continue;
            };
            let Some(pos) = sample.position_v() else {
                continue;
            };
            match camera_direction(&frame.pose, &pos) {
                Ok((azimuth_deg, elevation_deg, range_m, direction, vertical)) => {
                    timeline.directions.push(DirectionSample {
                        t,
                        object_id: track.object_id,
                        azimuth_deg,
                        elevation_deg,
                        range_m,
                        direction,
                        vertical,
                    });
                }
                Err(RelationError::AtCameraCenter) => timeline.warnings.push(format!(
                    "frame {t}: object {} at camera center, no direction",
                    track.object_id
                )),
                Err(_) => unreachable!(),
            }
        }

        for (i, ta) in tracks.tracks.iter().enumerate() {
            for tb in tracks.tracks.iter().skip(i + 1) {
                let (Some(sa), Some(sb)) = (ta.sample_at(t), tb.sample_at(t)) else {
                    continue;
                };
                let (Some(pa), Some(pb)) = (sa.position_v(), sb.position_v()) else {
                    continue;
                };
                let (Some(va), Some(vb)) = (sa.velocity_v(), sb.velocity_v()) else {
                    continue;
                };
                let pair = if ta.object_id < tb.object_id {
                    (ta.object_id, tb.object_id)
                } else {
                    (tb.object_id, ta.object_id)
                };
                let distance_m = (pb - pa).norm();
                let closing = match closing_speed(&pa, &pb, &va, &vb) {
                    Ok(c) => c,
                    Err(RelationError::Coincident) => {
                        timeline
                            .warnings
                            .push(format!("frame {t}: pair {pair:?} coincident"));
                        0.0
                    }
                    Err(_) => unreachable!(),
                };
                let relation = classify_relation(closing, eps_rel);
                timeline.relations.push(RelationSample {
                    t,
                    pair,
                    distance_m,
                    closing_speed: closing,
                    relation,
                    stable_relation: relation, // overwritten by the debounce pass
                });
            }
        }
    }

    debounce(&mut timeline.relations);
    timeline
}

/// Sequential per-pair fold: the stable label starts at the pair's first raw
/// label and switches only when a new raw label holds two consecutive frames.
fn debounce(relations: &mut [RelationSample]) {
    let mut keys: Vec<(u32, u32)> = relations.iter().map(|r| r.pair).collect();
    keys.sort_unstable();
    keys.dedup();
    for key in keys {
        let idx: Vec<usize> = relations
            .iter()
            .enumerate()
            .filter_map(|(i, r)| (r.pair == key).then_some(i))
            .collect();
        let mut stable = relations[idx[0]].relation;
        relations[idx[0]].stable_relation = stable;
        for w in 1..idx.len() {
            let prev = relations[idx[w - 1]].relation;
            let cur = relations[idx[w]].relation;
            if cur == prev {
                stable = cur;
            }
            relations[idx[w]].stable_relation = stable;
        }
    }
}

/// Writes one JSON record per relation and direction sample: the timeline
/// export interface.
pub fn export_timeline(timeline: &RelationTimeline, path: &std::path::Path) -> std::io::Result<()> {
    #[derive(Serialize)]
    #[serde(untagged)]
    enum Record<'a> {
        Relation(&'a RelationSample),
        Direction(&'a DirectionSample),
    }
    let mut out = String::new();
    for r in &timeline.relations {
        out.push_str(&serde_json::to_string(&Record::Relation(r)).unwrap());
        out.push('\n');
    }
    for d in &timeline.directions {
        out.push_str(&serde_json::to_string(&Record::Direction(d)).unwrap());
        out.push('\n');
    }
    std::fs::write(path, out)
}
