//! Ablation-table arithmetic over stored result fixtures.
//!
//! A fixture is a tab-separated table of per-configuration results (three
//! level scores plus the reported average); deltas between configurations
//! come back rounded to one decimal, matching the table's precision.

use super::MetricsError;

/// Rounds to one decimal place, ties away from zero.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub label: String,
    pub inter_object: f64,
    pub object_scene: f64,
    pub camera_object: f64,
    pub avg: f64,
}

#[derive(Debug, Clone, Default)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    /// Parses `label \t inter \t object_scene \t camera_object \t avg`
    /// lines; `#` comments and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, MetricsError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').map(str::trim).collect();
            if parts.len() != 5 {
                return Err(MetricsError::InvalidItem {
                    detail: format!("ablation line {}: need 5 tab-separated fields", i + 1),
                });
            }
            let num = |s: &str| -> Result<f64, MetricsError> {
                s.parse().map_err(|_| MetricsError::InvalidItem {
                    detail: format!("ablation line {}: bad number {s:?}", i + 1),
                })
            };
            rows.push(AblationRow {
                label: parts[0].to_string(),
                inter_object: num(parts[1])?,
                object_scene: num(parts[2])?,
                camera_object: num(parts[3])?,
                avg: num(parts[4])?,
            });
        }
        Ok(Self { rows })
    }

    pub fn row(&self, label: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// `avg(a) - avg(b)`, rounded to the table's one-decimal precision.
    pub fn delta_avg(&self, a: &str, b: &str) -> Option<f64> {
        Some(round1(self.row(a)?.avg - self.row(b)?.avg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
# configuration\tinter\tobject_scene\tcamera_object\tavg
w/o TCM\t59.0\t76.7\t56.2\t62.8
w/ T + M + S\t69.2\t79.1\t60.5\t68.3
";

    #[test]
    fn parses_and_recomputes_delta() {
        let table = AblationTable::parse(FIXTURE).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.delta_avg("w/ T + M + S", "w/o TCM"), Some(5.5));
    }

    #[test]
    fn missing_row_is_none() {
        let table = AblationTable::parse(FIXTURE).unwrap();
        assert_eq!(table.delta_avg("nope", "w/o TCM"), None);
    }

    #[test]
    fn malformed_line_rejected() {
        assert!(AblationTable::parse("just one field").is_err());
    }

    #[test]
    fn round1_ties() {
        assert_eq!(round1(5.4999999999999), 5.5);
        assert_eq!(round1(65.2333333), 65.2);
        assert_eq!(round1(-0.05), -0.1);
    }
}
