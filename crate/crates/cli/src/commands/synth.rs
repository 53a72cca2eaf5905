//! Scripted-scene fixture generation.

use clap::Args;
use std::path::PathBuf;

use dyncog_core::synth::ScriptedScene;

use crate::common::{write_config_echo, CliError, CliResult};

#[derive(Debug, Args, serde::Serialize)]
pub struct SynthArgs {
    /// Scene kind: demo, noisy, overtake, or planted.
    #[arg(long, default_value = "demo")]
    pub kind: String,
    /// Planted dynamism level 0..=5 (kind = planted only).
    #[arg(long, default_value_t = 3)]
    pub level: u32,
    #[arg(long, default_value_t = 30)]
    pub frames: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory for the scene assets and manifest.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: SynthArgs) -> CliResult {
    let scene = match args.kind.as_str() {
        "demo" => ScriptedScene::two_object_demo(args.frames, args.seed),
        "noisy" => ScriptedScene::noisy_constant_velocity(args.frames, args.seed),
        "overtake" => ScriptedScene::overtake(args.frames, args.seed),
        "planted" => {
            if args.level > 5 {
                return Err(CliError::usage("--level must be 0..=5"));
            }
            ScriptedScene::planted_dynamism(args.level, 0, args.frames, args.seed)
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown scene kind {other:?} (demo|noisy|overtake|planted)"
            )))
        }
    };
    let manifest = scene.write_to_dir(&args.out)?;
    write_config_echo(&args.out, &args)?;
    println!("{}", manifest.display());
    Ok(())
}
