//! Diagnostic answers and feature-vector assembly.

use std::path::Path;

use super::{CoverageFeatures, FilterError, GeometricFeatures, MotionFeatures};

pub const DIAGNOSTIC_QUESTION_COUNT: usize = 26;

const QUESTION_BANK: &str = include_str!("../../assets/diagnostic_questions.txt");

/// The built-in diagnostic question bank, one question per line.
pub fn question_bank() -> Vec<String> {
    parse_question_bank(QUESTION_BANK).expect("embedded question bank is valid")
}

/// Loads an edited question bank; must still contain exactly 26 questions.
pub fn load_question_bank(path: &Path) -> Result<Vec<String>, FilterError> {
    let text = std::fs::read_to_string(path)?;
    parse_question_bank(&text)
}

fn parse_question_bank(text: &str) -> Result<Vec<String>, FilterError> {
    let questions: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    if questions.len() != DIAGNOSTIC_QUESTION_COUNT {
        return Err(FilterError::InvalidDiagnostic {
            detail: format!(
                "question bank has {} questions, expected {DIAGNOSTIC_QUESTION_COUNT}",
                questions.len()
            ),
        });
    }
    Ok(questions)
}

/// Answers to the 26 diagnostic questions, each in [0, 1].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiagnosticVector {
    answers: Vec<f64>,
}

impl DiagnosticVector {
    pub fn new(answers: Vec<f64>) -> Result<Self, FilterError> {
        if answers.len() != DIAGNOSTIC_QUESTION_COUNT {
            return Err(FilterError::InvalidDiagnostic {
                detail: format!("{} answers, expected {DIAGNOSTIC_QUESTION_COUNT}", answers.len()),
            });
        }
        for (i, a) in answers.iter().enumerate() {
            if !(0.0..=1.0).contains(a) {
                return Err(FilterError::InvalidDiagnostic {
                    detail: format!("answer {} = {a} outside [0, 1]", i + 1),
                });
            }
        }
        Ok(Self { answers })
    }

    /// All answers 0.5: the uninformative prior used when no model is wired.
    pub fn neutral() -> Self {
        Self {
            answers: vec![0.5; DIAGNOSTIC_QUESTION_COUNT],
        }
    }

    pub fn answers(&self) -> &[f64] {
        &self.answers
    }
}

impl TryFrom<Vec<f64>> for DiagnosticVector {
    type Error = String;
    fn try_from(v: Vec<f64>) -> Result<Self, String> {
        Self::new(v).map_err(|e| e.to_string())
    }
}

impl From<DiagnosticVector> for Vec<f64> {
    fn from(d: DiagnosticVector) -> Self {
        d.answers
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Motion,
    Diagnostic,
    Geometric,
    Coverage,
}

impl FeatureGroup {
    pub fn dim(self) -> usize {
        match self {
            FeatureGroup::Motion => 5,
            FeatureGroup::Diagnostic => DIAGNOSTIC_QUESTION_COUNT,
            FeatureGroup::Geometric => 5,
            FeatureGroup::Coverage => 2,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "motion" => Some(FeatureGroup::Motion),
            "diagnostic" => Some(FeatureGroup::Diagnostic),
            "geometric" => Some(FeatureGroup::Geometric),
            "coverage" => Some(FeatureGroup::Coverage),
            _ => None,
        }
    }
}

/// Declares which feature groups enter the vector, in order.
///
/// The default is 5 motion + 26 diagnostic = 31 dims; geometric and
/// coverage features act as hard gates instead unless appended here.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FeatureLayout {
    pub groups: Vec<FeatureGroup>,
}

impl Default for FeatureLayout {
    fn default() -> Self {
        Self {
            groups: vec![FeatureGroup::Motion, FeatureGroup::Diagnostic],
        }
    }
}

impl FeatureLayout {
    pub fn all_groups() -> Self {
        Self {
            groups: vec![
                FeatureGroup::Motion,
                FeatureGroup::Diagnostic,
                FeatureGroup::Geometric,
                FeatureGroup::Coverage,
            ],
        }
    }

    /// Parses a comma-separated group list, e.g. `motion,diagnostic`.
    pub fn parse(spec: &str) -> Result<Self, FilterError> {
        let groups = spec
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                FeatureGroup::parse(s).ok_or_else(|| FilterError::InvalidDiagnostic {
                    detail: format!("unknown feature group {s:?}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if groups.is_empty() {
            return Err(FilterError::InvalidDiagnostic {
                detail: "layout selects no feature groups".into(),
            });
        }
        Ok(Self { groups })
    }

    pub fn dim(&self) -> usize {
        self.groups.iter().map(|g| g.dim()).sum()
    }

    /// Column names for the feature-table export, in vector order.
    pub fn names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.dim());
        for group in &self.groups {
            match group {
                FeatureGroup::Motion => {
                    out.extend(MotionFeatures::names().iter().map(|s| s.to_string()))
                }
                FeatureGroup::Diagnostic => {
                    out.extend((1..=DIAGNOSTIC_QUESTION_COUNT).map(|i| format!("diag_q{i:02}")))
                }
                FeatureGroup::Geometric => {
                    out.extend(GeometricFeatures::names().iter().map(|s| s.to_string()))
                }
                FeatureGroup::Coverage => {
                    out.extend(CoverageFeatures::names().iter().map(|s| s.to_string()))
                }
            }
        }
        out
    }
}

/// Assembles the flat feature vector in layout order.
pub fn assemble_features(
    motion: &MotionFeatures,
    geometric: &GeometricFeatures,
    coverage: &CoverageFeatures,
    diagnostic: &DiagnosticVector,
    layout: &FeatureLayout,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(layout.dim());
    for group in &layout.groups {
        match group {
            FeatureGroup::Motion => out.extend(motion.as_vector()),
            FeatureGroup::Diagnostic => out.extend_from_slice(diagnostic.answers()),
            FeatureGroup::Geometric => out.extend(geometric.as_vector()),
            FeatureGroup::Coverage => out.extend(coverage.as_vector()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dummy_inputs() -> (MotionFeatures, GeometricFeatures, CoverageFeatures, DiagnosticVector) {
        (
            MotionFeatures {
                blur_degree: 1.0,
                fps: 6.0,
                iframe_count: 0,
                mv_magnitude_mean: 2.0,
                mv_magnitude_var: 0.5,
            },
            GeometricFeatures {
                depth_continuity: 0.0,
                focal_stability: 0.0,
                rotation_accel_deg_s2: 0.0,
                translation_jerk_m_s3: 0.0,
                max_rotation_step_deg: 0.0,
            },
            CoverageFeatures {
                moving_pixel_ratio: 0.1,
                spatial_dispersion: 0.2,
            },
            DiagnosticVector::neutral(),
        )
    }

    #[test]
    fn default_layout_is_31_dims() {
        let (m, g, c, d) = dummy_inputs();
        let v = assemble_features(&m, &g, &c, &d, &FeatureLayout::default());
        assert_eq!(v.len(), 31);
        assert_eq!(FeatureLayout::default().names().len(), 31);
    }

    #[test]
    fn all_groups_layout_is_38_dims() {
        let (m, g, c, d) = dummy_inputs();
        let layout = FeatureLayout::all_groups();
        assert_eq!(layout.dim(), 31 + 5 + 2);
        assert_eq!(assemble_features(&m, &g, &c, &d, &layout).len(), 38);
    }

    #[test]
    fn layout_parse_roundtrip() {
        let layout = FeatureLayout::parse("motion, diagnostic,coverage").unwrap();
        assert_eq!(layout.dim(), 5 + 26 + 2);
        assert!(FeatureLayout::parse("motion,bogus").is_err());
        assert!(FeatureLayout::parse("").is_err());
    }

    #[test]
    fn diagnostic_vector_validation() {
        assert!(DiagnosticVector::new(vec![0.5; 25]).is_err());
        assert!(DiagnosticVector::new(vec![1.5; 26]).is_err());
        assert!(DiagnosticVector::new(vec![0.0; 26]).is_ok());
    }

    #[test]
    fn embedded_question_bank_has_26_lines() {
        assert_eq!(question_bank().len(), 26);
    }
}
