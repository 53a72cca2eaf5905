use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use dyncog_core::filter::{motion_features, score_video, train_forest, TrainParams};
use dyncog_core::kinematics::{backproject, build_tracks, ema_smooth, DEFAULT_ALPHA};
use dyncog_core::metrics::{boundary_accuracy_f, region_similarity_j};
use dyncog_core::relations::{infer_timeline, DEFAULT_EPS_REL};
use dyncog_core::scene::{CameraPose, Intrinsics, MaskGrid, PoseConvention};
use dyncog_core::synth::{pan_frames, ScriptedScene};
use dyncog_core::tcm::{build_cognitive_map, serialize_tcm, TcmConfig};

fn bench_backproject(c: &mut Criterion) {
    let intr = Intrinsics {
        fx: 500.0,
        fy: 500.0,
        cx: 320.0,
        cy: 240.0,
        width: 640,
        height: 480,
    };
    let pose = CameraPose::identity(PoseConvention::WorldFromCamera);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inputs: Vec<(nalgebra::Vector2<f64>, f64)> = (0..10_000)
        .map(|_| {
            (
                nalgebra::Vector2::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0)),
                rng.random_range(0.5..30.0),
            )
        })
        .collect();
    c.bench_function("backproject_10k", |b| {
        b.iter(|| {
            for (px, d) in &inputs {
                black_box(backproject(&intr, &pose, *px, *d).unwrap());
            }
        })
    });
}

fn random_mask(rng: &mut ChaCha8Rng, w: u32, h: u32) -> MaskGrid {
    let mut grid = MaskGrid::empty(w, h);
    let cx = rng.random_range(0..w) as i64;
    let cy = rng.random_range(0..h) as i64;
    let r = rng.random_range(8..(w.min(h) / 3)) as i64;
    for v in 0..h as i64 {
        for u in 0..w as i64 {
            if (u - cx).pow(2) + (v - cy).pow(2) <= r * r {
                grid.set(u as u32, v as u32, true);
            }
        }
    }
    grid
}

fn bench_mask_metrics(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_mask(&mut rng, 256, 256);
    let b = random_mask(&mut rng, 256, 256);
    c.bench_function("region_similarity_j_256", |bch| {
        bch.iter(|| black_box(region_similarity_j(&a, &b).unwrap()))
    });
    c.bench_function("boundary_f_256_tol3", |bch| {
        bch.iter(|| black_box(boundary_accuracy_f(&a, &b, 3.0).unwrap()))
    });
}

fn bench_block_matching(c: &mut Criterion) {
    let frames = pan_frames(192, 128, 4, 3, 3);
    c.bench_function("motion_features_pan_192x128x4", |b| {
        b.iter(|| black_box(motion_features(&frames, 6.0).unwrap()))
    });
}

fn bench_forest(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows: Vec<(Vec<f64>, f64)> = (0..200)
        .map(|_| {
            let x: Vec<f64> = (0..31).map(|_| rng.random::<f64>()).collect();
            let y = (x[0] * 5.0).clamp(0.0, 5.0);
            (x, y)
        })
        .collect();
    let params = TrainParams {
        trees: 50,
        ..TrainParams::default()
    };
    c.bench_function("forest_train_200x31", |b| {
        b.iter(|| black_box(train_forest(&rows, &params).unwrap()))
    });
    let model = train_forest(&rows, &params).unwrap();
    let x: Vec<f64> = (0..31).map(|i| f64::from(i) / 31.0).collect();
    c.bench_function("forest_predict", |b| {
        b.iter(|| black_box(score_video(&model, &x).unwrap()))
    });
}

fn bench_smoothing(c: &mut Criterion) {
    let series: Vec<nalgebra::Vector3<f64>> = (0..10_000)
        .map(|i| nalgebra::Vector3::new(f64::from(i), 0.1 * f64::from(i), 0.0))
        .collect();
    c.bench_function("ema_smooth_10k", |b| {
        b.iter(|| black_box(ema_smooth(&series, DEFAULT_ALPHA).unwrap()))
    });
}

fn bench_tcm(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let scene = ScriptedScene::overtake(30, 7);
    let path = scene.write_to_dir(dir.path()).unwrap();
    let manifest = dyncog_core::scene::load_manifest(&path).unwrap();
    let tracks = build_tracks(&manifest, DEFAULT_ALPHA).unwrap();
    let timeline = infer_timeline(&tracks, &manifest, DEFAULT_EPS_REL);
    let config = TcmConfig::default();
    c.bench_function("tcm_build_serialize_30f", |b| {
        b.iter(|| {
            let map = build_cognitive_map(&manifest, &tracks, &timeline, &config);
            black_box(serialize_tcm(&map))
        })
    });
}

criterion_group!(
    benches,
    bench_backproject,
    bench_mask_metrics,
    bench_block_matching,
    bench_forest,
    bench_smoothing,
    bench_tcm
);
criterion_main!(benches);
