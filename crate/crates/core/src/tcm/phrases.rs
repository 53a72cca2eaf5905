//! Replaceable phrase bank: one template per (section, state) pair.

use std::collections::BTreeMap;
use std::path::Path;

use super::TcmError;

const DEFAULT_BANK: &str = include_str!("../../assets/phrase_bank.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct PhraseBank {
    templates: BTreeMap<String, String>,
}

impl Default for PhraseBank {
    fn default() -> Self {
        Self::parse(DEFAULT_BANK).expect("embedded phrase bank is valid")
    }
}

impl PhraseBank {
    pub fn parse(text: &str) -> Result<Self, TcmError> {
        let mut templates = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, template) = line.split_once('=').ok_or_else(|| TcmError::Parse {
                line_no: i + 1,
                detail: "expected `key = template`".into(),
            })?;
            templates.insert(key.trim().to_string(), template.trim().to_string());
        }
        Ok(Self { templates })
    }

    pub fn from_file(path: &Path) -> Result<Self, TcmError> {
        let text = std::fs::read_to_string(path).map_err(|e| TcmError::Parse {
            line_no: 0,
            detail: format!("{}: {e}", path.display()),
        })?;
        let bank = Self::parse(&text)?;
        // Every key the renderer uses must exist.
        for key in REQUIRED_KEYS {
            if !bank.templates.contains_key(*key) {
                return Err(TcmError::Parse {
                    line_no: 0,
                    detail: format!("phrase bank missing key {key:?}"),
                });
            }
        }
        Ok(bank)
    }

    /// Renders a template with `{placeholder}` substitution.
    pub fn render(&self, key: &str, subs: &[(&str, &str)]) -> String {
        let mut text = self
            .templates
            .get(key)
            .unwrap_or_else(|| panic!("phrase bank missing key {key:?}"))
            .clone();
        for (name, value) in subs {
            text = text.replace(&format!("{{{name}}}"), value);
        }
        text
    }
}

const REQUIRED_KEYS: &[&str] = &[
    "frame.objects",
    "time.line",
    "spatial.object",
    "spatial.camera",
    "motion.moving",
    "motion.stationary",
    "pair.relation",
    "relation.approaching",
    "relation.parallel",
    "relation.receding",
    "event.enter",
    "event.leave",
    "event.present",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bank_has_all_required_keys() {
        let bank = PhraseBank::default();
        for key in REQUIRED_KEYS {
            bank.render(key, &[]);
        }
    }

    #[test]
    fn substitution() {
        let bank = PhraseBank::parse("greet = hello {who}").unwrap();
        assert_eq!(bank.render("greet", &[("who", "world")]), "hello world");
    }

    #[test]
    fn malformed_line_rejected() {
        assert!(PhraseBank::parse("no equals sign here").is_err());
    }
}
