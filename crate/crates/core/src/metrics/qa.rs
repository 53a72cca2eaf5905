//! QA items, answer parsing, accuracy, and chance baselines.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::MetricsError;
use crate::scene::Masklet;

/// The three dynamic-understanding levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    InterObject,
    ObjectScene,
    CameraObject,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::InterObject, Level::ObjectScene, Level::CameraObject];

    pub fn label(self) -> &'static str {
        match self {
            Level::InterObject => "Inter-Object",
            Level::ObjectScene => "Object-Scene",
            Level::CameraObject => "Camera-Object",
        }
    }

    pub fn subtasks(self) -> [Subtask; 3] {
        match self {
            Level::InterObject => [
                Subtask::ActObjDesc,
                Subtask::MoveTempDyn,
                Subtask::SpatialRelChange,
            ],
            Level::ObjectScene => [
                Subtask::MovPatternsTraj,
                Subtask::SpatialRelComp,
                Subtask::SceneFocusDyn,
            ],
            Level::CameraObject => [
                Subtask::CamMotionOrient,
                Subtask::CamObjInteraction,
                Subtask::TempVisualChange,
            ],
        }
    }
}

/// The nine subtasks, three per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subtask {
    #[serde(rename = "Act. & Obj. Desc.")]
    ActObjDesc,
    #[serde(rename = "Move. & Temp. Dyn.")]
    MoveTempDyn,
    #[serde(rename = "Spatial Rel. & Change")]
    SpatialRelChange,
    #[serde(rename = "Mov. Patterns & Traj.")]
    MovPatternsTraj,
    #[serde(rename = "Spatial Rel. & Comp.")]
    SpatialRelComp,
    #[serde(rename = "Scene Focus & Dyn.")]
    SceneFocusDyn,
    #[serde(rename = "Cam. Motion & Orient.")]
    CamMotionOrient,
    #[serde(rename = "Cam-Obj. Interaction")]
    CamObjInteraction,
    #[serde(rename = "Temp. & Visual Change")]
    TempVisualChange,
}

impl Subtask {
    pub const ALL: [Subtask; 9] = [
        Subtask::ActObjDesc,
        Subtask::MoveTempDyn,
        Subtask::SpatialRelChange,
        Subtask::MovPatternsTraj,
        Subtask::SpatialRelComp,
        Subtask::SceneFocusDyn,
        Subtask::CamMotionOrient,
        Subtask::CamObjInteraction,
        Subtask::TempVisualChange,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Subtask::ActObjDesc => "Act. & Obj. Desc.",
            Subtask::MoveTempDyn => "Move. & Temp. Dyn.",
            Subtask::SpatialRelChange => "Spatial Rel. & Change",
            Subtask::MovPatternsTraj => "Mov. Patterns & Traj.",
            Subtask::SpatialRelComp => "Spatial Rel. & Comp.",
            Subtask::SceneFocusDyn => "Scene Focus & Dyn.",
            Subtask::CamMotionOrient => "Cam. Motion & Orient.",
            Subtask::CamObjInteraction => "Cam-Obj. Interaction",
            Subtask::TempVisualChange => "Temp. & Visual Change",
        }
    }

    pub fn parse_label(s: &str) -> Option<Subtask> {
        Subtask::ALL.into_iter().find(|t| t.label() == s)
    }

    pub fn level(self) -> Level {
        match self {
            Subtask::ActObjDesc | Subtask::MoveTempDyn | Subtask::SpatialRelChange => {
                Level::InterObject
            }
            Subtask::MovPatternsTraj | Subtask::SpatialRelComp | Subtask::SceneFocusDyn => {
                Level::ObjectScene
            }
            Subtask::CamMotionOrient | Subtask::CamObjInteraction | Subtask::TempVisualChange => {
                Level::CameraObject
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnswerLabel {
    A,
    B,
    C,
    D,
}

impl AnswerLabel {
    pub const ALL: [AnswerLabel; 4] = [AnswerLabel::A, AnswerLabel::B, AnswerLabel::C, AnswerLabel::D];

    pub fn as_char(self) -> char {
        match self {
            AnswerLabel::A => 'A',
            AnswerLabel::B => 'B',
            AnswerLabel::C => 'C',
            AnswerLabel::D => 'D',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'A' => Some(AnswerLabel::A),
            'B' => Some(AnswerLabel::B),
            'C' => Some(AnswerLabel::C),
            'D' => Some(AnswerLabel::D),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::fmt::Display for AnswerLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A multiple-choice item. Options are labeled A.. in order; benchmark
/// generation always emits exactly 4, while chance-baseline arithmetic also
/// accepts 2- and 3-option items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAItem {
    pub qa_id: String,
    pub video_id: String,
    pub level: Level,
    pub subtask: Subtask,
    pub question: String,
    pub options: Vec<String>,
    pub answer: AnswerLabel,
}

impl QAItem {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(2..=4).contains(&self.options.len()) {
            return Err(MetricsError::InvalidItem {
                detail: format!("{}: {} options, need 2..=4", self.qa_id, self.options.len()),
            });
        }
        if self.answer.index() >= self.options.len() {
            return Err(MetricsError::InvalidItem {
                detail: format!("{}: answer {} outside labels", self.qa_id, self.answer),
            });
        }
        if self.subtask.level() != self.level {
            return Err(MetricsError::InvalidItem {
                detail: format!(
                    "{}: subtask {:?} belongs to {:?}, item says {:?}",
                    self.qa_id,
                    self.subtask,
                    self.subtask.level(),
                    self.level
                ),
            });
        }
        Ok(())
    }

    pub fn labels(&self) -> &[AnswerLabel] {
        &AnswerLabel::ALL[..self.options.len()]
    }
}

/// A referring expression bound to its gold masklet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundingItem {
    pub item_id: String,
    pub video_id: String,
    pub level: Level,
    pub referring_text: String,
    pub gold: crate::scene::MaskletRle,
}

impl GroundingItem {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.gold.frames.is_empty() {
            return Err(MetricsError::InvalidItem {
                detail: format!("{}: gold masklet empty", self.item_id),
            });
        }
        Ok(())
    }

    pub fn gold_masklet(&self) -> Result<Masklet, MetricsError> {
        crate::scene::masklet_from_rle(&self.gold).map_err(|e| MetricsError::InvalidItem {
            detail: e.to_string(),
        })
    }
}

/// Maps a free-text model reply to an option label.
///
/// The pinned rule: the first standalone letter A-D wins (uppercase,
/// not embedded in a longer word); otherwise a reply equal to one option's
/// text (trimmed, case-insensitive) maps to that option; otherwise `None`
/// and the item counts as wrong.
pub fn parse_reply(reply: &str, options: &[String]) -> Option<AnswerLabel> {
    let bytes: Vec<char> = reply.chars().collect();
    for (i, &c) in bytes.iter().enumerate() {
        if let Some(label) = AnswerLabel::from_char(c) {
            let prev_ok = i == 0 || !bytes[i - 1].is_ascii_alphanumeric();
            let next_ok = i + 1 >= bytes.len() || !bytes[i + 1].is_ascii_alphanumeric();
            if prev_ok && next_ok && label.index() < options.len() {
                return Some(label);
            }
        }
    }
    let trimmed = reply.trim().trim_matches(|c: char| c == '.' || c == '"');
    for (i, option) in options.iter().enumerate() {
        if trimmed.eq_ignore_ascii_case(option.trim()) {
            return Some(AnswerLabel::ALL[i]);
        }
    }
    None
}

/// Per-subtask tally: accuracy is `100 * correct / total`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SubtaskTally {
    pub correct: usize,
    pub total: usize,
}

impl SubtaskTally {
    pub fn pct(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.correct as f64 / self.total as f64
        }
    }
}

/// One scored item, tagged for aggregation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QaOutcome {
    pub qa_id: String,
    pub level: Level,
    pub subtask: Subtask,
    pub correct: bool,
}

/// Scores raw predictions against gold items.
///
/// Every prediction's qa_id must exist in gold; gold items without a
/// prediction count as wrong. Replies go through [`parse_reply`].
pub fn accuracy(
    predictions: &BTreeMap<String, String>,
    gold: &[QAItem],
) -> Result<Vec<QaOutcome>, MetricsError> {
    let known: std::collections::BTreeSet<&str> = gold.iter().map(|g| g.qa_id.as_str()).collect();
    for qa_id in predictions.keys() {
        if !known.contains(qa_id.as_str()) {
            return Err(MetricsError::UnknownQaId {
                qa_id: qa_id.clone(),
            });
        }
    }
    Ok(gold
        .iter()
        .map(|item| {
            let correct = predictions
                .get(&item.qa_id)
                .and_then(|reply| parse_reply(reply, &item.options))
                .is_some_and(|label| label == item.answer);
            QaOutcome {
                qa_id: item.qa_id.clone(),
                level: item.level,
                subtask: item.subtask,
                correct,
            }
        })
        .collect())
}

pub fn tally_by_subtask(outcomes: &[QaOutcome]) -> BTreeMap<Subtask, SubtaskTally> {
    let mut map: BTreeMap<Subtask, SubtaskTally> = BTreeMap::new();
    for o in outcomes {
        let t = map.entry(o.subtask).or_default();
        t.total += 1;
        if o.correct {
            t.correct += 1;
        }
    }
    map
}

/// Expected accuracy of uniform random answering: mean over items of
/// `100 / |options|`.
pub fn chance_random(items: &[QAItem]) -> f64 {
    assert!(!items.is_empty(), "chance baseline needs items");
    items
        .iter()
        .map(|i| 100.0 / i.options.len() as f64)
        .sum::<f64>()
        / items.len() as f64
}

/// Accuracy of always answering each subtask's most frequent gold label;
/// ties break by label order A < B < C < D.
pub fn chance_frequency(items: &[QAItem]) -> BTreeMap<Subtask, f64> {
    let mut grouped: BTreeMap<Subtask, Vec<AnswerLabel>> = BTreeMap::new();
    for item in items {
        grouped.entry(item.subtask).or_default().push(item.answer);
    }
    grouped
        .into_iter()
        .map(|(subtask, golds)| {
            let modal = AnswerLabel::ALL
                .iter()
                .map(|l| golds.iter().filter(|g| *g == l).count())
                .collect::<Vec<_>>();
            let best = *modal.iter().max().unwrap();
            (subtask, 100.0 * best as f64 / golds.len() as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn item(qa_id: &str, subtask: Subtask, answer: AnswerLabel, n_options: usize) -> QAItem {
        let it = QAItem {
            qa_id: qa_id.into(),
            video_id: "v".into(),
            level: subtask.level(),
            subtask,
            question: "?".into(),
            options: (0..n_options).map(|i| format!("option {i}")).collect(),
            answer,
        };
        it.validate().unwrap();
        it
    }

    #[test]
    fn half_right_is_fifty() {
        let gold = vec![
            item("q1", Subtask::ActObjDesc, AnswerLabel::A, 4),
            item("q2", Subtask::ActObjDesc, AnswerLabel::B, 4),
        ];
        let mut preds = BTreeMap::new();
        preds.insert("q1".to_string(), "A".to_string());
        preds.insert("q2".to_string(), "C".to_string());
        let outcomes = accuracy(&preds, &gold).unwrap();
        let tally = tally_by_subtask(&outcomes);
        assert_eq!(tally[&Subtask::ActObjDesc].pct(), 50.0);
    }

    #[test]
    fn all_correct_is_hundred() {
        let gold = vec![
            item("q1", Subtask::MoveTempDyn, AnswerLabel::C, 4),
            item("q2", Subtask::MoveTempDyn, AnswerLabel::D, 4),
        ];
        let mut preds = BTreeMap::new();
        preds.insert("q1".into(), "the answer is C".into());
        preds.insert("q2".into(), "D".into());
        let outcomes = accuracy(&preds, &gold).unwrap();
        assert!(outcomes.iter().all(|o| o.correct));
    }

    #[test]
    fn missing_prediction_counts_wrong() {
        let gold = vec![item("q1", Subtask::ActObjDesc, AnswerLabel::A, 4)];
        let outcomes = accuracy(&BTreeMap::new(), &gold).unwrap();
        assert!(!outcomes[0].correct);
    }

    #[test]
    fn unknown_qa_id_is_an_error() {
        let gold = vec![item("q1", Subtask::ActObjDesc, AnswerLabel::A, 4)];
        let mut preds = BTreeMap::new();
        preds.insert("zzz".to_string(), "A".to_string());
        assert!(matches!(
            accuracy(&preds, &gold),
            Err(MetricsError::UnknownQaId { .. })
        ));
    }

    #[test]
    fn reply_parsing_rules() {
        let options: Vec<String> = ["red car", "blue car", "green car", "truck"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(parse_reply("B", &options), Some(AnswerLabel::B));
        assert_eq!(parse_reply("the answer is C", &options), Some(AnswerLabel::C));
        assert_eq!(parse_reply("(D)", &options), Some(AnswerLabel::D));
        // Embedded letters do not count: "CAB" has no standalone A-D.
        assert_eq!(parse_reply("CAB", &options), None);
        assert_eq!(parse_reply("blue car", &options), Some(AnswerLabel::B));
        assert_eq!(parse_reply(" Red Car. ", &options), Some(AnswerLabel::A));
        assert_eq!(parse_reply("no idea", &options), None);
    }

    #[test]
    fn chance_random_values() {
        let four = vec![
            item("a", Subtask::ActObjDesc, AnswerLabel::A, 4),
            item("b", Subtask::ActObjDesc, AnswerLabel::B, 4),
        ];
        assert_eq!(chance_random(&four), 25.0);
        let mixed = vec![
            item("a", Subtask::ActObjDesc, AnswerLabel::A, 2),
            item("b", Subtask::ActObjDesc, AnswerLabel::B, 4),
        ];
        // mean of 50 and 25
        assert_eq!(chance_random(&mixed), 37.5);
    }

    #[test]
    fn chance_frequency_modal_and_ties() {
        use AnswerLabel::*;
        let golds = vec![
            item("1", Subtask::ActObjDesc, A, 4),
            item("2", Subtask::ActObjDesc, A, 4),
            item("3", Subtask::ActObjDesc, B, 4),
        ];
        let freq = chance_frequency(&golds);
        assert!((freq[&Subtask::ActObjDesc] - 200.0 / 3.0).abs() < 1e-9);

        let uniform = vec![
            item("1", Subtask::MoveTempDyn, A, 4),
            item("2", Subtask::MoveTempDyn, B, 4),
            item("3", Subtask::MoveTempDyn, C, 4),
            item("4", Subtask::MoveTempDyn, D, 4),
        ];
        assert_eq!(chance_frequency(&uniform)[&Subtask::MoveTempDyn], 25.0);

        // {B,B,C,C}: tie between B and C resolves to B, accuracy 50.
        let tied = vec![
            item("1", Subtask::SceneFocusDyn, B, 4),
            item("2", Subtask::SceneFocusDyn, B, 4),
            item("3", Subtask::SceneFocusDyn, C, 4),
            item("4", Subtask::SceneFocusDyn, C, 4),
        ];
        assert_eq!(chance_frequency(&tied)[&Subtask::SceneFocusDyn], 50.0);
    }

    #[test]
    fn item_validation() {
        let mut it = item("q", Subtask::ActObjDesc, AnswerLabel::A, 4);
        it.options.clear();
        assert!(it.validate().is_err());

        let mut it = item("q", Subtask::ActObjDesc, AnswerLabel::D, 4);
        it.options.truncate(3);
        assert!(it.validate().is_err());

        let mut it = item("q", Subtask::ActObjDesc, AnswerLabel::A, 4);
        it.level = Level::CameraObject;
        assert!(it.validate().is_err());
    }

    #[test]
    fn subtask_labels_roundtrip() {
        for t in Subtask::ALL {
            assert_eq!(Subtask::parse_label(t.label()), Some(t));
        }
        assert_eq!(Subtask::ALL.iter().filter(|t| t.level() == Level::InterObject).count(), 3);
        assert_eq!(Subtask::ALL.iter().filter(|t| t.level() == Level::ObjectScene).count(), 3);
        assert_eq!(Subtask::ALL.iter().filter(|t| t.level() == Level::CameraObject).count(), 3);
    }
}
