//! `dyncog`: build cognitive maps, filter videos by dynamism, compose
//! mask-guided inputs, generate QA with a multimodal model, and score
//! results.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 transport error.

mod commands;
mod common;

use clap::Parser;

use commands::{eval, filter, fuse, pipeline, qa_gen, synth, tcm_cmd};
use common::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "dyncog",
    version,
    about = "Dynamic-scene cognitive maps, dataset filtering, and QA evaluation"
)]
enum Cli {
    /// Score videos by dynamism and gate accept/reject decisions.
    Filter(filter::FilterArgs),
    /// Build the textual cognitive map for one video.
    Tcm(tcm_cmd::TcmArgs),
    /// Compose raw / masked / fused visual input sequences.
    Fuse(fuse::FuseArgs),
    /// Generate QA and grounding items through the model gateway.
    QaGen(qa_gen::QaGenArgs),
    /// Score predictions: accuracy, chance baselines, and J&F grounding.
    Eval(eval::EvalArgs),
    /// Run filter -> tcm -> qa-gen -> answer -> eval on one video.
    Pipeline(pipeline::PipelineArgs),
    /// Write a scripted synthetic scene (fixtures and demos).
    Synth(synth::SynthArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Render clap's message but fold every usage problem onto code 1.
            let _ = e.print();
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            std::process::exit(code);
        }
    };
    let result = match cli {
        Cli::Filter(args) => filter::run(args),
        Cli::Tcm(args) => tcm_cmd::run(args),
        Cli::Fuse(args) => fuse::run(args),
        Cli::QaGen(args) => qa_gen::run(args),
        Cli::Eval(args) => eval::run(args),
        Cli::Pipeline(args) => pipeline::run(args),
        Cli::Synth(args) => synth::run(args),
    };
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {:#}", e.message);
            std::process::exit(e.exit_code());
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self.kind {
            common::ErrorKind::Usage => 1,
            common::ErrorKind::Data => 2,
            common::ErrorKind::Transport => 3,
        }
    }
}
