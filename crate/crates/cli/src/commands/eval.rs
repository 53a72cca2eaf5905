//! The `eval` subcommand: accuracy, chance baselines, grounding J&F.

use clap::Args;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

use dyncog_core::metrics::{
    accuracy, build_report, chance_frequency, chance_random, jf_masklet, GroundingItem,
    GroundingOutcome, QAItem, ScoreReport,
};
use dyncog_core::scene::{masklet_from_rle, MaskletRle};

use crate::common::{read_jsonl, write_config_echo, CliError, CliResult};

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Gold QA items (jsonl of QAItem).
    #[arg(long)]
    pub qa: PathBuf,
    /// Predictions (jsonl of {qa_id, reply}).
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Gold grounding items (jsonl of GroundingItem).
    #[arg(long)]
    pub grounding_gold: Option<PathBuf>,
    /// Grounding predictions (jsonl of {item_id, masklet}).
    #[arg(long)]
    pub grounding_pred: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub qa_id: String,
    pub reply: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GroundingPrediction {
    pub item_id: String,
    pub masklet: MaskletRle,
}

pub fn score(
    gold: &[QAItem],
    predictions: &[PredictionRecord],
    grounding_gold: &[GroundingItem],
    grounding_pred: &[GroundingPrediction],
) -> Result<ScoreReport, CliError> {
    for item in gold {
        item.validate()?;
    }
    let pred_map: BTreeMap<String, String> = predictions
        .iter()
        .map(|p| (p.qa_id.clone(), p.reply.clone()))
        .collect();
    let qa_outcomes = accuracy(&pred_map, gold)?;

    let mut grounding_outcomes = Vec::new();
    for item in grounding_gold {
        item.validate()?;
        let gold_masklet = item.gold_masklet()?;
        let pred_masklet = grounding_pred
            .iter()
            .find(|p| p.item_id == item.item_id)
            .map(|p| masklet_from_rle(&p.masklet))
            .transpose()?
            .unwrap_or_else(|| dyncog_core::scene::Masklet::new(0, "missing"));
        let (j, f, jf) = jf_masklet(&pred_masklet, &gold_masklet)?;
        grounding_outcomes.push(GroundingOutcome {
            item_id: item.item_id.clone(),
            level: item.level,
            j,
            f,
            jf,
        });
    }
    Ok(build_report(&qa_outcomes, &grounding_outcomes))
}

pub fn run(args: EvalArgs) -> CliResult {
    let gold: Vec<QAItem> = read_jsonl(&args.qa)?;
    if gold.is_empty() {
        return Err(CliError::data(anyhow::anyhow!("no QA items in gold file")));
    }
    let predictions: Vec<PredictionRecord> = match &args.predictions {
        Some(path) => read_jsonl(path)?,
        None => Vec::new(),
    };
    let grounding_gold: Vec<GroundingItem> = match &args.grounding_gold {
        Some(path) => read_jsonl(path)?,
        None => Vec::new(),
    };
    let grounding_pred: Vec<GroundingPrediction> = match &args.grounding_pred {
        Some(path) => read_jsonl(path)?,
        None => Vec::new(),
    };

    let report = score(&gold, &predictions, &grounding_gold, &grounding_pred)?;

    std::fs::create_dir_all(&args.out)?;
    write_config_echo(&args.out, &args)?;
    let mut text = report.render_text();
    text.push_str("== chance baselines (accuracy %) ==\n");
    text.push_str(&format!("  random    {:>6.1}\n", chance_random(&gold)));
    for (subtask, pct) in chance_frequency(&gold) {
        text.push_str(&format!("  frequency {:<24} {:>6.1}\n", subtask.label(), pct));
    }
    std::fs::write(args.out.join("report.txt"), &text)?;
    std::fs::write(
        args.out.join("report.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    print!("{text}");
    Ok(())
}
