//! The `tcm` subcommand: cognitive-map document plus track/timeline exports.

use clap::Args;
use std::path::PathBuf;

use dyncog_core::kinematics::{build_tracks, export_tracks};
use dyncog_core::relations::{export_timeline, infer_timeline};
use dyncog_core::scene::{load_manifest, resample};
use dyncog_core::tcm::{build_cognitive_map, serialize_tcm, PhraseBank, TcmConfig, TcmToggles};
use dyncog_core::TARGET_FPS;

use crate::common::{write_config_echo, CliResult, RunLog};

#[derive(Debug, Args, serde::Serialize)]
pub struct TcmArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Include temporal semantics (timestamps, appearance events).
    #[arg(short = 'T', long)]
    pub temporal: bool,
    /// Include motion dynamics (speeds, relations).
    #[arg(short = 'M', long)]
    pub motion: bool,
    /// Include spatial geometry (positions, sizes, directions).
    #[arg(short = 'S', long)]
    pub spatial: bool,
    /// Position-smoothing factor in (0, 1].
    #[arg(long, default_value_t = dyncog_core::kinematics::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Closing-speed band for the parallel relation, m/s.
    #[arg(long, default_value_t = dyncog_core::relations::DEFAULT_EPS_REL)]
    pub eps_rel: f64,
    /// Override the built-in phrase bank.
    #[arg(long)]
    pub phrase_bank: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Builds tracks, timeline, and map for one manifest; shared with the
/// pipeline subcommand.
pub fn build_document(
    manifest_path: &std::path::Path,
    toggles: TcmToggles,
    alpha: f64,
    eps_rel: f64,
    phrases: PhraseBank,
) -> Result<
    (
        dyncog_core::scene::VideoManifest,
        dyncog_core::TrackSet,
        dyncog_core::RelationTimeline,
        dyncog_core::CognitiveMap,
    ),
    crate::common::CliError,
> {
    let manifest = resample(&load_manifest(manifest_path)?, TARGET_FPS);
    let tracks = build_tracks(&manifest, alpha)?;
    let timeline = infer_timeline(&tracks, &manifest, eps_rel);
    let config = TcmConfig {
        toggles,
        phrases,
        ..TcmConfig::default()
    };
    let map = build_cognitive_map(&manifest, &tracks, &timeline, &config);
    Ok((manifest, tracks, timeline, map))
}

pub fn run(args: TcmArgs) -> CliResult {
    let phrases = match &args.phrase_bank {
        Some(path) => PhraseBank::from_file(path)?,
        None => PhraseBank::default(),
    };
    let toggles = TcmToggles {
        temporal: args.temporal,
        motion: args.motion,
        spatial: args.spatial,
    };
    let (_, tracks, timeline, map) =
        build_document(&args.manifest, toggles, args.alpha, args.eps_rel, phrases)?;

    std::fs::create_dir_all(&args.out)?;
    let mut log = RunLog::create(&args.out)?;
    write_config_echo(&args.out, &args)?;
    let doc = serialize_tcm(&map);
    std::fs::write(args.out.join("tcm.txt"), &doc)?;
    export_tracks(&tracks, &args.out.join("tracks.jsonl"))?;
    export_timeline(&timeline, &args.out.join("timeline.jsonl"))?;
    log.line(&format!(
        "tcm for {}: {} lines, {} tracks",
        map.video_id,
        doc.lines().count(),
        tracks.tracks.len()
    ));
    println!("{}", args.out.join("tcm.txt").display());
    Ok(())
}
