//! Score-report assembly: per-subtask accuracies, per-level and overall
//! averages, and grounding aggregates per level.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::qa::{tally_by_subtask, Level, QaOutcome, Subtask, SubtaskTally};

/// One scored grounding item, tagged by level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundingOutcome {
    pub item_id: String,
    pub level: Level,
    pub j: f64,
    pub f: f64,
    pub jf: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct JfAggregate {
    pub j: f64,
    pub f: f64,
    pub jf: f64,
    pub count: usize,
}

/// Aggregated results. Every stored average is the plain arithmetic mean of
/// its constituents, so the whole report can be recomputed from its leaves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreReport {
    pub qa_subtasks: BTreeMap<Subtask, SubtaskTally>,
    /// Mean of the level's subtask accuracies.
    pub qa_levels: BTreeMap<Level, f64>,
    /// Mean of the level averages.
    pub qa_overall: f64,
    pub qa_total_items: usize,
    pub grounding_levels: BTreeMap<Level, JfAggregate>,
    /// Mean of the per-level aggregates.
    pub grounding_average: Option<JfAggregate>,
    pub grounding_total_items: usize,
}

/// Builds the report from tagged outcomes.
pub fn build_report(qa: &[QaOutcome], grounding: &[GroundingOutcome]) -> ScoreReport {
    let qa_subtasks = tally_by_subtask(qa);

    let mut qa_levels = BTreeMap::new();
    for level in Level::ALL {
        let pcts: Vec<f64> = level
            .subtasks()
            .iter()
            .filter_map(|s| qa_subtasks.get(s).map(SubtaskTally::pct))
            .collect();
        if !pcts.is_empty() {
            qa_levels.insert(level, mean(&pcts));
        }
    }
    let qa_overall = mean(&qa_levels.values().copied().collect::<Vec<_>>());

    let mut grounding_levels = BTreeMap::new();
    for level in Level::ALL {
        let of_level: Vec<&GroundingOutcome> =
            grounding.iter().filter(|g| g.level == level).collect();
        if of_level.is_empty() {
            continue;
        }
        let n = of_level.len();
        grounding_levels.insert(
            level,
            JfAggregate {
                j: mean(&of_level.iter().map(|g| g.j).collect::<Vec<_>>()),
                f: mean(&of_level.iter().map(|g| g.f).collect::<Vec<_>>()),
                jf: mean(&of_level.iter().map(|g| g.jf).collect::<Vec<_>>()),
                count: n,
            },
        );
    }
    let grounding_average = if grounding_levels.is_empty() {
        None
    } else {
        let aggs: Vec<&JfAggregate> = grounding_levels.values().collect();
        Some(JfAggregate {
            j: mean(&aggs.iter().map(|a| a.j).collect::<Vec<_>>()),
            f: mean(&aggs.iter().map(|a| a.f).collect::<Vec<_>>()),
            jf: mean(&aggs.iter().map(|a| a.jf).collect::<Vec<_>>()),
            count: grounding.len(),
        })
    };

    ScoreReport {
        qa_subtasks,
        qa_levels,
        qa_overall,
        qa_total_items: qa.len(),
        grounding_levels,
        grounding_average,
        grounding_total_items: grounding.len(),
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

impl ScoreReport {
    /// Plain-text rendering: subtask columns grouped by level, then the
    /// grounding block.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str("== spatio-temporal reasoning (accuracy %) ==\n");
        for level in Level::ALL {
            if !level.subtasks().iter().any(|s| self.qa_subtasks.contains_key(s)) {
                continue;
            }
            out.push_str(&format!("{}\n", level.label()));
            for subtask in level.subtasks() {
                if let Some(t) = self.qa_subtasks.get(&subtask) {
                    out.push_str(&format!(
                        "  {:<24} {:>6.1}  ({}/{})\n",
                        subtask.label(),
                        t.pct(),
                        t.correct,
                        t.total
                    ));
                }
            }
            if let Some(avg) = self.qa_levels.get(&level) {
                out.push_str(&format!("  {:<24} {:>6.1}\n", "level average", avg));
            }
        }
        if !self.qa_subtasks.is_empty() {
            out.push_str(&format!("{:<26} {:>6.1}\n", "overall", self.qa_overall));
        }
        if !self.grounding_levels.is_empty() {
            out.push_str("== dynamic object grounding (J / F / J&F) ==\n");
            for level in Level::ALL {
                if let Some(a) = self.grounding_levels.get(&level) {
                    out.push_str(&format!(
                        "  {:<16} {:>5.1} {:>5.1} {:>5.1}  (n={})\n",
                        level.label(),
                        100.0 * a.j,
                        100.0 * a.f,
                        100.0 * a.jf,
                        a.count
                    ));
                }
            }
            if let Some(a) = self.grounding_average {
                out.push_str(&format!(
                    "  {:<16} {:>5.1} {:>5.1} {:>5.1}\n",
                    "Average",
                    100.0 * a.j,
                    100.0 * a.f,
                    100.0 * a.jf
                ));
            }
        }
        out
    }
}
