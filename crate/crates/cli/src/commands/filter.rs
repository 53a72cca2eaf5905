//! The `filter` subcommand: features, dynamism scores, gate decisions.

use clap::Args;
use rayon::prelude::*;
use std::path::PathBuf;

use dyncog_core::filter::{
    extract_features, gate_decision, load_forest, question_bank, save_forest, score_video,
    train_forest, DiagnosticVector, FeatureLayout, ForestModel, GateThresholds, TrainParams,
};
use dyncog_core::gateway::{Gateway, MockFixture};
use dyncog_core::scene::{load_manifest, resample};
use dyncog_core::TARGET_FPS;

use crate::common::{
    discover_manifests, write_config_echo, write_jsonl, CliError, CliResult, RunLog,
};

#[derive(Debug, Args, serde::Serialize)]
pub struct FilterArgs {
    /// Manifest files, scene directories, or directories of scenes.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Pretrained forest model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Training labels CSV (`video_id,label`): trains on the inputs
    /// themselves instead of loading a model.
    #[arg(long)]
    pub train_labels: Option<PathBuf>,
    /// Where to persist the freshly trained model.
    #[arg(long)]
    pub save_model: Option<PathBuf>,
    /// Feature groups, comma separated: motion,diagnostic,geometric,coverage.
    #[arg(long, default_value = "motion,diagnostic")]
    pub layout: String,
    /// Mock-gateway fixture supplying diagnostic answers.
    #[arg(long)]
    pub mock_fixture: Option<PathBuf>,
    #[arg(long, default_value_t = 3.0)]
    pub min_score: f64,
    #[arg(long, default_value_t = 0.02)]
    pub max_focal_stability: f64,
    #[arg(long, default_value_t = 15.0)]
    pub max_rotation_deg: f64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 12)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, serde::Serialize)]
struct DecisionRecord {
    video_id: String,
    score: f64,
    accept: bool,
    reasons: Vec<dyncog_core::filter::RejectReason>,
}

struct VideoFeatures {
    video_id: String,
    vector: Vec<f64>,
    geometric: dyncog_core::filter::GeometricFeatures,
}

pub fn run(args: FilterArgs) -> CliResult {
    if args.model.is_none() && args.train_labels.is_none() {
        return Err(CliError::usage(
            "either --model or --train-labels is required",
        ));
    }
    let layout = FeatureLayout::parse(&args.layout)?;
    let manifests = discover_manifests(&args.inputs)?;
    let mut log = RunLog::create(&args.out)?;
    write_config_echo(&args.out, &args)?;

    let gateway = match &args.mock_fixture {
        Some(path) => Some(Gateway::with_mock(
            MockFixture::load(path).map_err(CliError::from_gateway)?,
        )),
        None => None,
    };
    let questions = question_bank();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::data(anyhow::anyhow!(e)))?;

    // Feature extraction is per-video parallel; diagnostics go through the
    // gateway serially up front (the mock is ordered).
    let mut inputs = Vec::new();
    for path in &manifests {
        let manifest = resample(&load_manifest(path)?, TARGET_FPS);
        let diagnostic = match &gateway {
            Some(gw) => {
                let refs = dyncog_core::gateway::frame_refs(&manifest);
                gw.run_diagnostics(&manifest.video_id, &refs, &questions)
                    .map_err(CliError::from_gateway)?
            }
            None => DiagnosticVector::neutral(),
        };
        inputs.push((manifest, diagnostic));
    }

    let features: Vec<VideoFeatures> = pool.install(|| {
        inputs
            .par_iter()
            .map(|(manifest, diagnostic)| {
                let (vector, geometric) = extract_features(manifest, diagnostic, &layout)?;
                Ok(VideoFeatures {
                    video_id: manifest.video_id.clone(),
                    vector,
                    geometric,
                })
            })
            .collect::<Result<Vec<_>, dyncog_core::filter::FilterError>>()
    })?;
    let mut features = features;
    features.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    log.line(&format!("extracted features for {} videos", features.len()));

    let model = resolve_model(&args, &features)?;
    if let Some(path) = &args.save_model {
        save_forest(&model, path)?;
        log.line(&format!("saved model to {}", path.display()));
    }

    write_feature_table(&args.out.join("features.csv"), &layout, &features)?;

    let mut decisions = Vec::new();
    let thresholds = GateThresholds {
        min_score: args.min_score,
        max_focal_stability: args.max_focal_stability,
        max_rotation_step_deg: args.max_rotation_deg,
    };
    for vf in &features {
        let score = score_video(&model, &vf.vector)?;
        let decision = gate_decision(&score, &vf.geometric, None, &thresholds);
        decisions.push(DecisionRecord {
            video_id: vf.video_id.clone(),
            score: score.value,
            accept: decision.accept,
            reasons: decision.reasons,
        });
    }
    write_jsonl(&args.out.join("decisions.jsonl"), &decisions)?;
    for d in &decisions {
        println!(
            "{}\t{:.3}\t{}",
            d.video_id,
            d.score,
            if d.accept { "accept" } else { "reject" }
        );
    }
    log.line(&format!(
        "{} accepted / {} total",
        decisions.iter().filter(|d| d.accept).count(),
        decisions.len()
    ));
    Ok(())
}

fn resolve_model(args: &FilterArgs, features: &[VideoFeatures]) -> Result<ForestModel, CliError> {
    if let Some(path) = &args.model {
        return Ok(load_forest(path)?);
    }
    let labels_path = args.train_labels.as_ref().expect("checked above");
    let text = std::fs::read_to_string(labels_path)
        .map_err(|e| CliError::data(anyhow::anyhow!("{}: {e}", labels_path.display())))?;
    let mut labels = std::collections::BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, value) = line.split_once(',').ok_or_else(|| {
            CliError::data(anyhow::anyhow!(
                "{} line {}: expected `video_id,label`",
                labels_path.display(),
                i + 1
            ))
        })?;
        let label: f64 = value.trim().parse().map_err(|_| {
            CliError::data(anyhow::anyhow!(
                "{} line {}: bad label {value:?}",
                labels_path.display(),
                i + 1
            ))
        })?;
        labels.insert(id.trim().to_string(), label);
    }
    let rows: Vec<(Vec<f64>, f64)> = features
        .iter()
        .filter_map(|vf| labels.get(&vf.video_id).map(|l| (vf.vector.clone(), *l)))
        .collect();
    if rows.is_empty() {
        return Err(CliError::data(anyhow::anyhow!(
            "no training labels matched any input video_id"
        )));
    }
    let params = TrainParams {
        trees: args.trees,
        max_depth: args.max_depth,
        min_samples_split: 2,
        seed: args.seed,
    };
    Ok(train_forest(&rows, &params)?)
}

fn write_feature_table(
    path: &std::path::Path,
    layout: &FeatureLayout,
    features: &[VideoFeatures],
) -> std::io::Result<()> {
    let mut out = String::from("video_id");
    for name in layout.names() {
        out.push(',');
        out.push_str(&name);
    }
    out.push('\n');
    for vf in features {
        out.push_str(&vf.video_id);
        for v in &vf.vector {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out)
}
