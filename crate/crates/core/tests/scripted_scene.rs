//! End-to-end checks of the reconstruction -> relations -> cognitive-map
//! chain against scripted scenes, where ground truth is known analytically
//! and never flows through the pipeline under test.

use dyncog_core::kinematics::{build_tracks, DEFAULT_ALPHA};
use dyncog_core::relations::{infer_timeline, Relation, DEFAULT_EPS_REL};
use dyncog_core::scene::load_manifest;
use dyncog_core::synth::ScriptedScene;
use dyncog_core::tcm::{
    aggregate_narrative, build_cognitive_map, parse_tcm, render_frame, serialize_tcm, TcmConfig,
    TcmToggles,
};
use nalgebra::Vector3;

fn pipeline(scene: &ScriptedScene, dir: &std::path::Path) -> (
    dyncog_core::scene::VideoManifest,
    dyncog_core::TrackSet,
    dyncog_core::RelationTimeline,
) {
    let path = scene.write_to_dir(dir).unwrap();
    let manifest = load_manifest(&path).unwrap();
    let tracks = build_tracks(&manifest, DEFAULT_ALPHA).unwrap();
    let timeline = infer_timeline(&tracks, &manifest, DEFAULT_EPS_REL);
    (manifest, tracks, timeline)
}

#[test]
fn noiseless_demo_reconstructs_exact_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::two_object_demo(30, 42);
    let (_, tracks, _) = pipeline(&scene, dir.path());
    assert_eq!(tracks.tracks.len(), 2);

    // Object A at t=0 sits exactly at (0, 0, 5): the rendered disk is
    // pixel-symmetric and the depth is quantization-exact.
    let a = tracks.track(1).unwrap();
    let p0 = a.samples[0].position_v().unwrap();
    assert!((p0 - Vector3::new(0.0, 0.0, 5.0)).norm() < 1e-6, "{p0:?}");

    // Static object B: zero velocity exactly (identical frames).
    let b = tracks.track(2).unwrap();
    for s in b.samples.iter().skip(1) {
        assert!(s.velocity_v().unwrap().norm() < 1e-9);
    }
}

#[test]
fn demo_velocity_converges_within_five_frames() {
    // Noiseless: the EMA transient alone must be inside 5% from frame 5 on
    // (analytically 1 - 0.4^5 = 1.02% at frame 5).
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::two_object_demo(30, 42);
    let (_, tracks, _) = pipeline(&scene, dir.path());
    let a = tracks.track(1).unwrap();
    for s in a.samples.iter().skip(5) {
        let v = s.velocity_v().unwrap();
        let err = (v - Vector3::new(1.0, 0.0, 0.0)).norm();
        assert!(err <= 0.05, "frame {}: velocity {v:?} err {err}", s.t);
    }
}

#[test]
fn noisy_demo_tracks_within_five_percent() {
    // +/-1 cm centroid noise, seed frozen from an oracle run.
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::noisy_constant_velocity(30, 42);
    let (_, tracks, _) = pipeline(&scene, dir.path());

    let a = tracks.track(1).unwrap();
    for s in a.samples.iter().skip(5) {
        let v = s.velocity_v().unwrap();
        let err = (v - Vector3::new(1.0, 0.0, 0.0)).norm();
        assert!(err <= 0.05, "frame {}: velocity {v:?} err {err}", s.t);
    }
    // Static object B stays below the stationary band.
    let b = tracks.track(2).unwrap();
    for s in b.samples.iter().skip(5) {
        let speed = s.velocity_v().unwrap().norm();
        assert!(speed < 0.05, "frame {}: speed {speed}", s.t);
    }
}

#[test]
fn occlusion_gap_yields_unobserved_samples_and_bridged_kinematics() {
    let dir = tempfile::tempdir().unwrap();
    let mut scene = ScriptedScene::two_object_demo(30, 42);
    scene.objects[0].hidden_frames = vec![10, 11, 12];
    let (_, tracks, _) = pipeline(&scene, dir.path());
    let a = tracks.track(1).unwrap();
    for t in [10, 11, 12] {
        let s = a.sample_at(t).unwrap();
        assert!(!s.observed);
        assert!(s.position.is_none() && s.velocity.is_none());
    }
    // Track continues around the gap. The first post-gap velocity is
    // EMA-damped but spans the true elapsed time (0.5 s for 3 hidden
    // frames), so it stays near the true motion instead of exploding or
    // collapsing; a few frames later the transient has decayed.
    let s13 = a.sample_at(13).unwrap();
    assert!(s13.observed);
    let v13 = s13.velocity_v().unwrap();
    assert!(v13.x > 0.5 && v13.x < 1.1, "post-gap velocity {v13:?}");
    let v17 = a.sample_at(17).unwrap().velocity_v().unwrap();
    assert!((v17.x - 1.0).abs() < 0.1, "recovered velocity {v17:?}");
}

#[test]
fn object_visible_in_single_frame_has_no_velocity() {
    let dir = tempfile::tempdir().unwrap();
    let mut scene = ScriptedScene::two_object_demo(12, 42);
    scene.objects[1].hidden_frames = (1..12).collect();
    let (_, tracks, _) = pipeline(&scene, dir.path());
    let b = tracks.track(2).unwrap();
    assert_eq!(b.samples.len(), 1);
    assert!(b.samples[0].observed);
    assert!(b.samples[0].velocity.is_none());
}

#[test]
fn overtake_produces_approach_parallel_recede() {
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::overtake(30, 42);
    let (_, _tracks, timeline) = pipeline(&scene, dir.path());
    let series = timeline.pair_series(1, 2);
    assert!(!series.is_empty());

    // Collapse the debounced labels into segments.
    let mut segments: Vec<Relation> = Vec::new();
    for s in &series {
        if segments.last() != Some(&s.stable_relation) {
            segments.push(s.stable_relation);
        }
    }
    assert_eq!(
        segments,
        vec![Relation::Approaching, Relation::Parallel, Relation::Receding],
        "got segments {segments:?}"
    );
}

#[test]
fn single_object_video_has_directions_but_no_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let mut scene = ScriptedScene::two_object_demo(10, 42);
    scene.objects.truncate(1);
    let (_, tracks, timeline) = pipeline(&scene, dir.path());
    assert_eq!(tracks.tracks.len(), 1);
    assert!(timeline.relations.is_empty());
    assert!(!timeline.directions.is_empty());
}

#[test]
fn objects_never_coobserved_have_no_pair_samples() {
    let dir = tempfile::tempdir().unwrap();
    let mut scene = ScriptedScene::two_object_demo(12, 42);
    scene.objects[0].hidden_frames = (6..12).collect();
    scene.objects[1].hidden_frames = (0..6).collect();
    let (_, _tracks, timeline) = pipeline(&scene, dir.path());
    assert!(timeline.pair_series(1, 2).is_empty());
}

// ---------------------------------------------------------------------------
// Cognitive map
// ---------------------------------------------------------------------------

#[test]
fn all_off_config_yields_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::two_object_demo(6, 42);
    let (manifest, tracks, timeline) = pipeline(&scene, dir.path());
    let config = TcmConfig {
        toggles: TcmToggles::none(),
        ..TcmConfig::default()
    };
    let block = render_frame(0, &manifest, &tracks, &timeline, &config);
    assert_eq!(block.lines().count(), 1);
    assert!(block.contains("frame 0, objects: [A:car, B:person]"), "{block}");

    let map = build_cognitive_map(&manifest, &tracks, &timeline, &config);
    for frame in &map.frames {
        assert_eq!(frame.lines.len(), 1);
    }
    assert!(map.narrative.is_empty());
}

#[test]
fn spatial_only_block_matches_expected_text() {
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::two_object_demo(30, 42);
    let (manifest, tracks, timeline) = pipeline(&scene, dir.path());
    let config = TcmConfig {
        toggles: TcmToggles {
            temporal: false,
            motion: false,
            spatial: true,
        },
        ..TcmConfig::default()
    };
    let block = render_frame(0, &manifest, &tracks, &timeline, &config);
    assert!(
        block.contains("object A (car): position (0.00, 0.00, 5.00) m, front, 5.00 m from camera"),
        "{block}"
    );
    assert!(!block.contains("speed"), "{block}");
}

#[test]
fn motion_only_block_reports_stationary_object() {
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::two_object_demo(30, 42);
    let (manifest, tracks, timeline) = pipeline(&scene, dir.path());
    let config = TcmConfig {
        toggles: TcmToggles {
            temporal: false,
            motion: true,
            spatial: false,
        },
        ..TcmConfig::default()
    };
    let block = render_frame(3, &manifest, &tracks, &timeline, &config);
    assert!(block.contains("object B: stationary (0.00 m/s)"), "{block}");
    assert!(!block.contains("position"), "{block}");
}

#[test]
fn toggle_monotonicity_across_all_eight_configs() {
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::overtake(30, 42);
    let (manifest, tracks, timeline) = pipeline(&scene, dir.path());

    let configs: Vec<TcmToggles> = (0..8)
        .map(|bits| TcmToggles {
            temporal: bits & 1 != 0,
            motion: bits & 2 != 0,
            spatial: bits & 4 != 0,
        })
        .collect();
    let line_sets: Vec<std::collections::BTreeSet<String>> = configs
        .iter()
        .map(|&toggles| {
            let config = TcmConfig {
                toggles,
                ..TcmConfig::default()
            };
            let map = build_cognitive_map(&manifest, &tracks, &timeline, &config);
            map.line_texts().into_iter().map(String::from).collect()
        })
        .collect();

    for (i, &ci) in configs.iter().enumerate() {
        for (j, &cj) in configs.iter().enumerate() {
            let subset_config = (!ci.temporal || cj.temporal)
                && (!ci.motion || cj.motion)
                && (!ci.spatial || cj.spatial);
            if subset_config {
                assert!(
                    line_sets[i].is_subset(&line_sets[j]),
                    "config {i} lines not a subset of config {j}"
                );
            }
        }
    }
}

#[test]
fn serialization_is_deterministic_and_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::overtake(30, 42);
    let (manifest, tracks, timeline) = pipeline(&scene, dir.path());
    let config = TcmConfig::default();
    let map1 = build_cognitive_map(&manifest, &tracks, &timeline, &config);
    let map2 = build_cognitive_map(&manifest, &tracks, &timeline, &config);
    let doc1 = serialize_tcm(&map1);
    let doc2 = serialize_tcm(&map2);
    assert_eq!(doc1, doc2, "byte-identical across runs");

    let parsed = parse_tcm(&doc1).unwrap();
    assert_eq!(parsed, map1, "parse(serialize(map)) = map");
}

#[test]
fn default_document_stays_within_200_lines() {
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::two_object_demo(30, 42);
    let (manifest, tracks, timeline) = pipeline(&scene, dir.path());
    let map = build_cognitive_map(&manifest, &tracks, &timeline, &TcmConfig::default());
    let doc = serialize_tcm(&map);
    let n = doc.lines().count();
    assert!(n <= 200, "document has {n} lines");
}

#[test]
fn overtake_narrative_sentences_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::overtake(30, 42);
    let (manifest, tracks, timeline) = pipeline(&scene, dir.path());
    let config = TcmConfig::default();
    let narrative = aggregate_narrative(&timeline, &tracks, &manifest, &config);
    let text: Vec<&str> = narrative.iter().map(|l| l.text.as_str()).collect();
    let joined = text.join("\n");

    let approach = joined.find("A approaches B").expect("approach sentence");
    let pass = joined.find("A passes B").expect("pass sentence");
    let recede = joined.find("A recedes from B").expect("recede sentence");
    assert!(approach < pass && pass < recede, "{joined}");
}

#[test]
fn fully_visible_object_reports_present_throughout() {
    let dir = tempfile::tempdir().unwrap();
    let mut scene = ScriptedScene::two_object_demo(12, 42);
    scene.objects.truncate(1);
    let (manifest, tracks, timeline) = pipeline(&scene, dir.path());
    let narrative = aggregate_narrative(&timeline, &tracks, &manifest, &TcmConfig::default());
    assert_eq!(narrative.len(), 1);
    assert!(narrative[0].text.contains("A present throughout"));
}

#[test]
fn late_entry_event_carries_its_time() {
    let dir = tempfile::tempdir().unwrap();
    let mut scene = ScriptedScene::two_object_demo(30, 42);
    scene.objects[1].hidden_frames = (0..10).collect();
    let (manifest, tracks, timeline) = pipeline(&scene, dir.path());
    let narrative = aggregate_narrative(&timeline, &tracks, &manifest, &TcmConfig::default());
    let joined: String = narrative
        .iter()
        .map(|l| l.text.as_str())
        .collect::<Vec<_>>()
        .join("\n");
    // Frame 10 at 6 fps: 10/6 = 1.67 s.
    assert!(joined.contains("B enters the scene at 1.67 s"), "{joined}");
}

#[test]
fn printed_numbers_match_track_values_after_rounding() {
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::overtake(30, 42);
    let (manifest, tracks, timeline) = pipeline(&scene, dir.path());
    let map = build_cognitive_map(&manifest, &tracks, &timeline, &TcmConfig::default());

    let pos_re = regex::Regex::new(
        r"object (\w+) \([^)]*\): position \((-?\d+\.\d+), (-?\d+\.\d+), (-?\d+\.\d+)\) m",
    )
    .unwrap();
    let name_to_id = |name: &str| -> u32 {
        match name {
            "A" => 1,
            "B" => 2,
            other => panic!("unknown display name {other}"),
        }
    };
    let mut checked = 0;
    for frame in &map.frames {
        for line in &frame.lines {
            if let Some(caps) = pos_re.captures(&line.text) {
                let id = name_to_id(&caps[1]);
                let track = tracks.track(id).unwrap();
                let p = track.sample_at(frame.t).unwrap().position_v().unwrap();
                for (k, axis) in [(2, p.x), (3, p.y), (4, p.z)] {
                    let printed: f64 = caps[k].parse().unwrap();
                    assert!(
                        (printed - axis).abs() <= 0.005 + 1e-12,
                        "frame {} object {}: printed {printed} vs value {axis}",
                        frame.t,
                        id
                    );
                }
                checked += 1;
            }
        }
    }
    assert!(checked >= 50, "only {checked} position lines checked");
}

#[test]
fn identity_stability_across_document() {
    // Ids {1, 2} map to A, B everywhere: no other names appear.
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::overtake(20, 42);
    let (manifest, tracks, timeline) = pipeline(&scene, dir.path());
    let map = build_cognitive_map(&manifest, &tracks, &timeline, &TcmConfig::default());
    let doc = serialize_tcm(&map);
    assert!(doc.contains("A:car"));
    assert!(doc.contains("B:cyclist"));
    assert!(!doc.contains("C:"), "unexpected third identity\n{doc}");
}
