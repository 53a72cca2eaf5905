//! The spatio-temporal textual cognitive map: per-frame structured text
//! from geometry, kinematics, and relations, aggregated into a narrative.
//!
//! Every line carries a section tag — `[F]` frame structure (always
//! emitted), `[T]` temporal, `[M]` motion, `[S]` spatial — so the T/M/S
//! ablation is a pure line filter: enabling a section only ever adds lines.
//! Output is byte-deterministic for identical inputs and configuration.
//!
//! Document grammar (one line each):
//! ```text
//! # tcm fps=<fps> T=<0|1> M=<0|1> S=<0|1> video=<id>
//! [F] frame <t>, objects: [<name>:<category>, ...]
//! [T] time <s> s (<elapsed>)
//! [S] object <name> (<category>): position (<x>, <y>, <z>) m, <direction>, <range> m from camera, size <w>x<h> m
//! [S] camera: position (<x>, <y>, <z>) m            # only for moving cameras
//! [M] object <name>: speed <v> m/s, heading (<x>, <y>, <z>), accel <a> m/s^2
//! [M] pair <a>-<b>: <relation>, closing <c> m/s, distance <d> m   # on label changes
//! [T] narrative: <sentence>                          # after the frame blocks
//! [M] narrative: <sentence>
//! ```

mod phrases;

pub use phrases::PhraseBank;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::kinematics::{ObjectTrack, TrackSet};
use crate::relations::{Relation, RelationTimeline};
use crate::scene::VideoManifest;

#[derive(Debug, Error)]
pub enum TcmError {
    #[error("tcm parse error at line {line_no}: {detail}")]
    Parse { line_no: usize, detail: String },
}

/// Which sections are rendered. The frame/object-identity header is always
/// emitted; an all-off config yields headers only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TcmToggles {
    pub temporal: bool,
    pub motion: bool,
    pub spatial: bool,
}

impl Default for TcmToggles {
    fn default() -> Self {
        Self {
            temporal: true,
            motion: true,
            spatial: true,
        }
    }
}

impl TcmToggles {
    pub fn none() -> Self {
        Self {
            temporal: false,
            motion: false,
            spatial: false,
        }
    }

    fn allows(&self, section: Section) -> bool {
        match section {
            Section::Frame => true,
            Section::Temporal => self.temporal,
            Section::Motion => self.motion,
            Section::Spatial => self.spatial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rounding {
    /// Decimal places for meters.
    pub meters_dp: usize,
    /// Decimal places for m/s and m/s^2.
    pub speed_dp: usize,
}

impl Default for Rounding {
    fn default() -> Self {
        Self {
            meters_dp: 2,
            speed_dp: 2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TcmConfig {
    pub toggles: TcmToggles,
    pub rounding: Rounding,
    pub phrases: PhraseBank,
}

/// Speed below which an object renders as stationary, m/s. Matches the
/// relation band default.
pub const STATIONARY_SPEED_EPS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Section {
    Frame,
    Temporal,
    Motion,
    Spatial,
}

impl Section {
    pub fn tag(self) -> &'static str {
        match self {
            Section::Frame => "F",
            Section::Temporal => "T",
            Section::Motion => "M",
            Section::Spatial => "S",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "F" => Some(Section::Frame),
            "T" => Some(Section::Temporal),
            "M" => Some(Section::Motion),
            "S" => Some(Section::Spatial),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedLine {
    pub section: Section,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameBlock {
    pub t: usize,
    pub lines: Vec<TaggedLine>,
}

/// The structured map: ordered frame blocks plus the event narrative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CognitiveMap {
    pub video_id: String,
    pub fps: f64,
    pub toggles: TcmToggles,
    pub frames: Vec<FrameBlock>,
    pub narrative: Vec<TaggedLine>,
}

impl CognitiveMap {
    /// All visible lines in document order, without tags.
    pub fn line_texts(&self) -> Vec<&str> {
        self.frames
            .iter()
            .flat_map(|f| f.lines.iter())
            .chain(self.narrative.iter())
            .map(|l| l.text.as_str())
            .collect()
    }
}

/// Spreadsheet-style display names by ascending object id: A, B, ... Z,
/// AA, AB, ...
pub fn display_names(tracks: &TrackSet) -> BTreeMap<u32, String> {
    let mut ids: Vec<u32> = tracks.tracks.iter().map(|t| t.object_id).collect();
    ids.sort_unstable();
    ids.into_iter()
        .enumerate()
        .map(|(i, id)| (id, letter_name(i)))
        .collect()
}

fn letter_name(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'A' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

fn fmt_num(value: f64, dp: usize) -> String {
    let s = format!("{value:.dp$}");
    // Normalize "-0.00" to "0.00".
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn fmt_vec3(v: &nalgebra::Vector3<f64>, dp: usize) -> String {
    format!(
        "{}, {}, {}",
        fmt_num(v.x, dp),
        fmt_num(v.y, dp),
        fmt_num(v.z, dp)
    )
}

fn camera_is_dynamic(manifest: &VideoManifest) -> bool {
    manifest.frames.windows(2).any(|w| {
        let (r0, c0) = (
            w[0].pose.as_world_from_camera().0,
            w[0].pose.camera_center_world(),
        );
        let (r1, c1) = (
            w[1].pose.as_world_from_camera().0,
            w[1].pose.camera_center_world(),
        );
        (c1 - c0).norm() > 1e-9 || (r1 - r0).abs().max() > 1e-9
    })
}

/// Whether the pair's stable label at this sample differs from the previous
/// sample's (or the sample is the pair's first): these are the frames that
/// carry a pair line.
fn pair_line_frames(timeline: &RelationTimeline) -> Vec<(usize, (u32, u32))> {
    let mut out = Vec::new();
    for pair in timeline.pairs() {
        let series = timeline.pair_series(pair.0, pair.1);
        for (i, sample) in series.iter().enumerate() {
            if i == 0 || series[i - 1].stable_relation != sample.stable_relation {
                out.push((sample.t, pair));
            }
        }
    }
    out
}

/// Renders one frame block (unfiltered sections are dropped per config).
pub fn render_frame(
    t: usize,
    manifest: &VideoManifest,
    tracks: &TrackSet,
    timeline: &RelationTimeline,
    config: &TcmConfig,
) -> String {
    let names = display_names(tracks);
    let camera_dynamic = camera_is_dynamic(manifest);
    let pair_frames = pair_line_frames(timeline);
    let block = frame_block(
        t,
        manifest,
        tracks,
        timeline,
        config,
        &names,
        camera_dynamic,
        &pair_frames,
    );
    block
        .lines
        .iter()
        .map(|l| format!("[{}] {}", l.section.tag(), l.text))
        .collect::<Vec<_>>()
        .join("\n")
}

#[allow(clippy::too_many_arguments)]
fn frame_block(
    t: usize,
    manifest: &VideoManifest,
    tracks: &TrackSet,
    timeline: &RelationTimeline,
    config: &TcmConfig,
    names: &BTreeMap<u32, String>,
    camera_dynamic: bool,
    pair_frames: &[(usize, (u32, u32))],
) -> FrameBlock {
    let bank = &config.phrases;
    let rounding = config.rounding;
    let mut lines: Vec<TaggedLine> = Vec::new();

    // Observed objects, in display-name order (= ascending id).
    let mut observed: Vec<&ObjectTrack> = tracks
        .tracks
        .iter()
        .filter(|track| track.sample_at(t).is_some_and(|s| s.observed))
        .collect();
    observed.sort_by_key(|track| track.object_id);

    let listing = observed
        .iter()
        .map(|track| format!("{}:{}", names[&track.object_id], track.category))
        .collect::<Vec<_>>()
        .join(", ");
    lines.push(TaggedLine {
        section: Section::Frame,
        text: bank.render(
            "frame.objects",
            &[("t", &t.to_string()), ("objects", &listing)],
        ),
    });

    let time_s = manifest.frame_time(t);
    let elapsed = if t == 0 {
        "start".to_string()
    } else {
        format!("+{} s", fmt_num(1.0 / manifest.fps, 2))
    };
    lines.push(TaggedLine {
        section: Section::Temporal,
        text: bank.render(
            "time.line",
            &[("time", fmt_num(time_s, 2).as_str()), ("elapsed", &elapsed)],
        ),
    });

    for track in &observed {
        let sample = track.sample_at(t).unwrap();
        let pos = sample.position_v().unwrap();
        let direction = timeline
            .directions_at(t)
            .find(|d| d.object_id == track.object_id);
        let Some(dir) = direction else { continue };
        let dir_text = match dir.vertical {
            Some(crate::relations::VerticalRefinement::Above) => {
                format!("{}-above", dir.direction.label())
            }
            Some(crate::relations::VerticalRefinement::Below) => {
                format!("{}-below", dir.direction.label())
            }
            None => dir.direction.label().to_string(),
        };
        let size = track
            .bbox_at(t)
            .map(|b| {
                format!(
                    "{}x{}",
                    fmt_num(b.x, rounding.meters_dp),
                    fmt_num(b.y, rounding.meters_dp)
                )
            })
            .unwrap_or_else(|| "unknown".into());
        lines.push(TaggedLine {
            section: Section::Spatial,
            text: bank.render(
                "spatial.object",
                &[
                    ("name", names[&track.object_id].as_str()),
                    ("category", track.category.as_str()),
                    ("position", &fmt_vec3(&pos, rounding.meters_dp)),
                    ("direction", &dir_text),
                    ("range", &fmt_num(dir.range_m, rounding.meters_dp)),
                    ("size", &size),
                ],
            ),
        });
    }

    if camera_dynamic {
        let center = manifest.frames[t].pose.camera_center_world();
        lines.push(TaggedLine {
            section: Section::Spatial,
            text: bank.render(
                "spatial.camera",
                &[("position", fmt_vec3(&center, rounding.meters_dp).as_str())],
            ),
        });
    }

    for track in &observed {
        let sample = track.sample_at(t).unwrap();
        let Some(vel) = sample.velocity_v() else {
            continue;
        };
        let speed = vel.norm();
        let text = if speed < STATIONARY_SPEED_EPS {
            bank.render(
                "motion.stationary",
                &[
                    ("name", names[&track.object_id].as_str()),
                    ("speed", &fmt_num(speed, rounding.speed_dp)),
                ],
            )
        } else {
            let heading = vel / speed;
            let accel = sample.acceleration_v().map(|a| a.norm()).unwrap_or(0.0);
            bank.render(
                "motion.moving",
                &[
                    ("name", names[&track.object_id].as_str()),
                    ("speed", &fmt_num(speed, rounding.speed_dp)),
                    ("heading", &fmt_vec3(&heading, 2)),
                    ("accel", &fmt_num(accel, rounding.speed_dp)),
                ],
            )
        };
        lines.push(TaggedLine {
            section: Section::Motion,
            text,
        });
    }

    for sample in timeline.relations_at(t) {
        if !pair_frames.contains(&(t, sample.pair)) {
            continue;
        }
        lines.push(TaggedLine {
            section: Section::Motion,
            text: bank.render(
                "pair.relation",
                &[
                    ("a", names[&sample.pair.0].as_str()),
                    ("b", names[&sample.pair.1].as_str()),
                    ("relation", sample.stable_relation.label()),
                    ("closing", &fmt_num(sample.closing_speed, rounding.speed_dp)),
                    ("distance", &fmt_num(sample.distance_m, rounding.meters_dp)),
                ],
            ),
        });
    }

    FrameBlock {
        t,
        lines: lines
            .into_iter()
            .filter(|l| config.toggles.allows(l.section))
            .collect(),
    }
}

/// Event sentences: per-object appearance/disappearance and per-pair
/// debounced relation-label segments, ordered by event time.
pub fn aggregate_narrative(
    timeline: &RelationTimeline,
    tracks: &TrackSet,
    manifest: &VideoManifest,
    config: &TcmConfig,
) -> Vec<TaggedLine> {
    let bank = &config.phrases;
    let names = display_names(tracks);
    let last_frame = manifest.frame_count() - 1;
    // (event time, tiebreak, line)
    let mut events: Vec<(f64, usize, TaggedLine)> = Vec::new();

    for track in &tracks.tracks {
        let observed: Vec<usize> = track
            .samples
            .iter()
            .filter(|s| s.observed)
            .map(|s| s.t)
            .collect();
        let (Some(&first), Some(&last)) = (observed.first(), observed.last()) else {
            continue;
        };
        let name = names[&track.object_id].as_str();
        if first == 0 && last == last_frame {
            events.push((
                0.0,
                0,
                TaggedLine {
                    section: Section::Temporal,
                    text: format!("narrative: {}", bank.render("event.present", &[("name", name)])),
                },
            ));
        } else {
            if first > 0 {
                let time = fmt_num(manifest.frame_time(first), 2);
                events.push((
                    manifest.frame_time(first),
                    0,
                    TaggedLine {
                        section: Section::Temporal,
                        text: format!(
                            "narrative: {}",
                            bank.render("event.enter", &[("name", name), ("time", &time)])
                        ),
                    },
                ));
            }
            if last < last_frame {
                let time = fmt_num(manifest.frame_time(last), 2);
                events.push((
                    manifest.frame_time(last),
                    0,
                    TaggedLine {
                        section: Section::Temporal,
                        text: format!(
                            "narrative: {}",
                            bank.render("event.leave", &[("name", name), ("time", &time)])
                        ),
                    },
                ));
            }
        }
    }

    for pair in timeline.pairs() {
        let series = timeline.pair_series(pair.0, pair.1);
        let mut seg_start = 0usize;
        for i in 0..=series.len() {
            let boundary = i == series.len()
                || (i > 0 && series[i].stable_relation != series[i - 1].stable_relation);
            if !boundary {
                continue;
            }
            let seg = &series[seg_start..i];
            if !seg.is_empty() {
                let label = seg[0].stable_relation;
                let key = match label {
                    Relation::Approaching => "relation.approaching",
                    Relation::Parallel => "relation.parallel",
                    Relation::Receding => "relation.receding",
                };
                let t0 = manifest.frame_time(seg[0].t);
                let t1 = manifest.frame_time(seg[seg.len() - 1].t);
                let sentence = format!(
                    "{} (t={}-{} s)",
                    bank.render(
                        key,
                        &[
                            ("a", names[&pair.0].as_str()),
                            ("b", names[&pair.1].as_str()),
                        ],
                    ),
                    fmt_num(t0, 2),
                    fmt_num(t1, 2)
                );
                events.push((
                    t0,
                    1,
                    TaggedLine {
                        section: Section::Motion,
                        text: format!("narrative: {sentence}"),
                    },
                ));
            }
            seg_start = i;
        }
    }

    events.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.text.cmp(&b.2.text))
    });
    events
        .into_iter()
        .map(|(_, _, line)| line)
        .filter(|l| config.toggles.allows(l.section))
        .collect()
}

/// Builds the full map for a video.
pub fn build_cognitive_map(
    manifest: &VideoManifest,
    tracks: &TrackSet,
    timeline: &RelationTimeline,
    config: &TcmConfig,
) -> CognitiveMap {
    let names = display_names(tracks);
    let camera_dynamic = camera_is_dynamic(manifest);
    let pair_frames = pair_line_frames(timeline);
    let frames = (0..manifest.frame_count())
        .map(|t| {
            frame_block(
                t,
                manifest,
                tracks,
                timeline,
                config,
                &names,
                camera_dynamic,
                &pair_frames,
            )
        })
        .collect();
    CognitiveMap {
        video_id: manifest.video_id.clone(),
        fps: manifest.fps,
        toggles: config.toggles,
        frames,
        narrative: aggregate_narrative(timeline, tracks, manifest, config),
    }
}

/// Serializes the map to the section-tagged plain-text document. Output is
/// byte-identical for identical maps.
pub fn serialize_tcm(map: &CognitiveMap) -> String {
    let flag = |b: bool| if b { "1" } else { "0" };
    let mut out = format!(
        "# tcm fps={} T={} M={} S={} video={}\n",
        map.fps,
        flag(map.toggles.temporal),
        flag(map.toggles.motion),
        flag(map.toggles.spatial),
        map.video_id
    );
    for frame in &map.frames {
        for line in &frame.lines {
            out.push_str(&format!("[{}] {}\n", line.section.tag(), line.text));
        }
    }
    for line in &map.narrative {
        out.push_str(&format!("[{}] {}\n", line.section.tag(), line.text));
    }
    out
}

/// Parses a serialized document back to the structured map.
pub fn parse_tcm(text: &str) -> Result<CognitiveMap, TcmError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(TcmError::Parse {
        line_no: 1,
        detail: "empty document".into(),
    })?;
    let rest = header.strip_prefix("# tcm ").ok_or(TcmError::Parse {
        line_no: 1,
        detail: "missing `# tcm` header".into(),
    })?;
    let mut fps = None;
    let mut toggles = TcmToggles::none();
    let mut video_id = None;
    let mut cursor = rest;
    while let Some((token, tail)) = split_token(cursor) {
        if let Some(id) = token.strip_prefix("video=") {
            // video id is last and may contain spaces
            let mut full = id.to_string();
            if !tail.is_empty() {
                full.push(' ');
                full.push_str(tail);
            }
            video_id = Some(full);
            break;
        } else if let Some(v) = token.strip_prefix("fps=") {
            fps = Some(v.parse().map_err(|_| TcmError::Parse {
                line_no: 1,
                detail: format!("bad fps {v:?}"),
            })?);
        } else if let Some(v) = token.strip_prefix("T=") {
            toggles.temporal = v == "1";
        } else if let Some(v) = token.strip_prefix("M=") {
            toggles.motion = v == "1";
        } else if let Some(v) = token.strip_prefix("S=") {
            toggles.spatial = v == "1";
        }
        cursor = tail;
    }
    let (Some(fps), Some(video_id)) = (fps, video_id) else {
        return Err(TcmError::Parse {
            line_no: 1,
            detail: "header missing fps or video".into(),
        });
    };

    let mut frames: Vec<FrameBlock> = Vec::new();
    let mut narrative = Vec::new();
    for (i, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let bad = |detail: String| TcmError::Parse {
            line_no: i + 1,
            detail,
        };
        let tag_end = raw.find("] ").ok_or_else(|| bad("missing section tag".into()))?;
        let section = Section::from_tag(&raw[1..tag_end])
            .ok_or_else(|| bad(format!("unknown tag {:?}", &raw[..=tag_end])))?;
        let text = raw[tag_end + 2..].to_string();

        if text.starts_with("narrative: ") {
            narrative.push(TaggedLine { section, text });
        } else if section == Section::Frame && text.starts_with("frame ") {
            let t: usize = text["frame ".len()..]
                .split(',')
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| bad(format!("bad frame line {text:?}")))?;
            frames.push(FrameBlock {
                t,
                lines: vec![TaggedLine { section, text }],
            });
        } else {
            let frame = frames
                .last_mut()
                .ok_or_else(|| bad("section line before first frame".into()))?;
            frame.lines.push(TaggedLine { section, text });
        }
    }

    Ok(CognitiveMap {
        video_id,
        fps,
        toggles,
        frames,
        narrative,
    })
}

fn split_token(s: &str) -> Option<(&str, &str)> {
    let s = s.trim_start();
    if s.is_empty() {
        return None;
    }
    match s.find(' ') {
        Some(i) => Some((&s[..i], &s[i + 1..])),
        None => Some((s, "")),
    }
}
