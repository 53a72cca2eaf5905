//! The `fuse` subcommand: visual input sequences.

use clap::Args;
use std::path::PathBuf;

use dyncog_core::fusion::{compose_sequence, write_sequence, FusionKind, FusionLayout, FusionMode};
use dyncog_core::scene::{load_manifest, resample};
use dyncog_core::TARGET_FPS;

use crate::common::{write_config_echo, CliError, CliResult};

#[derive(Debug, Args, serde::Serialize)]
pub struct FuseArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// raw, masked_only, or fusion.
    #[arg(long, default_value = "fusion")]
    pub mode: String,
    /// interleave or side_by_side (fusion mode only).
    #[arg(long, default_value = "interleave")]
    pub layout: String,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: FuseArgs) -> CliResult {
    let kind = match args.mode.as_str() {
        "raw" => FusionKind::Raw,
        "masked_only" => FusionKind::MaskedOnly,
        "fusion" => FusionKind::Fusion,
        other => {
            return Err(CliError::usage(format!(
                "unknown mode {other:?} (raw|masked_only|fusion)"
            )))
        }
    };
    let layout = match args.layout.as_str() {
        "interleave" => FusionLayout::Interleave,
        "side_by_side" => FusionLayout::SideBySide,
        other => {
            return Err(CliError::usage(format!(
                "unknown layout {other:?} (interleave|side_by_side)"
            )))
        }
    };
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(CliError::usage("--alpha must be in [0, 1]"));
    }
    let manifest = resample(&load_manifest(&args.manifest)?, TARGET_FPS);
    let mode = FusionMode {
        kind,
        overlay_alpha: args.alpha,
        layout,
    };
    let seq = compose_sequence(&manifest, &mode)?;
    write_sequence(&seq, &args.out)?;
    write_config_echo(&args.out, &args)?;
    println!("{} frames -> {}", seq.frames.len(), args.out.display());
    Ok(())
}
