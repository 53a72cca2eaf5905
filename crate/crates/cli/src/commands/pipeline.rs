//! The `pipeline` subcommand: filter -> tcm -> qa-gen -> answer -> eval on
//! one video, in a single invocation.

use clap::Args;
use std::path::PathBuf;

use dyncog_core::filter::{
    extract_features, gate_decision, load_forest, question_bank, score_video, FeatureLayout,
    GateThresholds,
};
use dyncog_core::gateway::{frame_refs, PromptTemplate, TemplateKind};
use dyncog_core::metrics::chance_random;
use dyncog_core::scene::{load_manifest, resample};
use dyncog_core::tcm::{serialize_tcm, PhraseBank, TcmToggles};
use dyncog_core::TARGET_FPS;

use super::eval::PredictionRecord;
use super::qa_gen::build_gateway;
use super::tcm_cmd::build_document;
use crate::common::{write_config_echo, write_jsonl, CliError, CliResult, RunLog};

#[derive(Debug, Args, serde::Serialize)]
pub struct PipelineArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Pretrained dynamism forest.
    #[arg(long)]
    pub forest_model: PathBuf,
    /// Mock transport fixture (diagnostics, generation, answering).
    #[arg(long)]
    pub mock_fixture: Option<PathBuf>,
    #[arg(long)]
    pub base_url: Option<String>,
    #[arg(long, default_value = "qwen3-vl")]
    pub model_name: String,
    #[arg(long, default_value = dyncog_core::gateway::DEFAULT_CREDENTIAL_ENV)]
    pub credential_env: String,
    #[arg(long, default_value_t = 120.0)]
    pub timeout_s: f64,
    #[arg(long, default_value = "motion,diagnostic")]
    pub layout: String,
    #[arg(long, default_value_t = 3.0)]
    pub min_score: f64,
    #[arg(long, default_value_t = dyncog_core::kinematics::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = dyncog_core::relations::DEFAULT_EPS_REL)]
    pub eps_rel: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: PipelineArgs) -> CliResult {
    std::fs::create_dir_all(&args.out)?;
    let mut log = RunLog::create(&args.out)?;
    write_config_echo(&args.out, &args)?;
    let gateway = build_gateway(
        args.mock_fixture.as_ref(),
        args.base_url.as_ref(),
        &args.model_name,
        &args.credential_env,
        args.timeout_s,
        2,
    )?;

    // Stage 1: dynamism filter.
    let manifest = resample(&load_manifest(&args.manifest)?, TARGET_FPS);
    let refs = frame_refs(&manifest);
    let diagnostics = gateway
        .run_diagnostics(&manifest.video_id, &refs, &question_bank())
        .map_err(CliError::from_gateway)?;
    let layout = FeatureLayout::parse(&args.layout)?;
    let (vector, geometric) = extract_features(&manifest, &diagnostics, &layout)?;
    let model = load_forest(&args.forest_model)?;
    let score = score_video(&model, &vector)?;
    let thresholds = GateThresholds {
        min_score: args.min_score,
        ..GateThresholds::default()
    };
    let decision = gate_decision(&score, &geometric, None, &thresholds);
    std::fs::write(
        args.out.join("decision.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "video_id": manifest.video_id,
            "score": score.value,
            "accept": decision.accept,
            "reasons": decision.reasons,
        }))
        .expect("decision serializes"),
    )?;
    log.line(&format!(
        "filter: score {:.3} accept={}",
        score.value, decision.accept
    ));
    if !decision.accept {
        println!("rejected: {}", args.out.join("decision.json").display());
        return Ok(());
    }

    // Stage 2: cognitive map.
    let (manifest, _tracks, _timeline, map) = build_document(
        &args.manifest,
        TcmToggles::default(),
        args.alpha,
        args.eps_rel,
        PhraseBank::default(),
    )?;
    let tcm_text = serialize_tcm(&map);
    std::fs::write(args.out.join("tcm.txt"), &tcm_text)?;
    log.line(&format!("tcm: {} lines", tcm_text.lines().count()));

    // Stage 3: QA + grounding generation (every template the fixture or
    // endpoint can serve).
    let mut qa = Vec::new();
    let mut grounding = Vec::new();
    let mut rejected = Vec::new();
    for kind in TemplateKind::ALL {
        let template = PromptTemplate::builtin(kind);
        let generation = gateway
            .generate_qa(&manifest, Some(&tcm_text), &template)
            .map_err(CliError::from_gateway)?;
        qa.extend(generation.qa);
        grounding.extend(generation.grounding);
        rejected.extend(generation.rejected);
    }
    write_jsonl(&args.out.join("qa.jsonl"), &qa)?;
    write_jsonl(&args.out.join("grounding.jsonl"), &grounding)?;
    write_jsonl(&args.out.join("rejected.jsonl"), &rejected)?;
    log.line(&format!(
        "qa-gen: {} qa, {} grounding",
        qa.len(),
        grounding.len()
    ));

    // Stage 4: answer the generated items through the same gateway.
    let mut predictions = Vec::new();
    for item in &qa {
        let reply = gateway
            .answer_vqa(&refs, item, Some(&tcm_text))
            .map_err(CliError::from_gateway)?;
        predictions.push(PredictionRecord {
            qa_id: item.qa_id.clone(),
            reply,
        });
    }
    write_jsonl(&args.out.join("predictions.jsonl"), &predictions)?;

    // Stage 5: score.
    let report = super::eval::score(&qa, &predictions, &grounding, &[])?;
    let mut text = report.render_text();
    text.push_str("== chance baselines (accuracy %) ==\n");
    text.push_str(&format!("  random    {:>6.1}\n", chance_random(&qa)));
    std::fs::write(args.out.join("report.txt"), &text)?;
    std::fs::write(
        args.out.join("report.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    log.line(&format!("eval: overall {:.1}", report.qa_overall));
    print!("{text}");
    Ok(())
}
