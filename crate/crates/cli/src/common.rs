//! Shared plumbing: error classification, config echo, run log, jsonl IO.

use std::io::Write;
use std::path::{Path, PathBuf};

use dyncog_core::gateway::GatewayError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Transport,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: anyhow::Error,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Usage,
            message: anyhow::anyhow!(msg.into()),
        }
    }

    pub fn data(err: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: ErrorKind::Data,
            message: err.into(),
        }
    }

    pub fn transport(err: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: ErrorKind::Transport,
            message: err.into(),
        }
    }

    /// Classifies a gateway error: connectivity problems are transport
    /// (exit 3), malformed content is data (exit 2).
    pub fn from_gateway(err: GatewayError) -> Self {
        match err {
            GatewayError::Transport { .. }
            | GatewayError::Timeout { .. }
            | GatewayError::MissingCredential { .. } => Self::transport(err),
            other => Self::data(other),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(err: E) -> Self {
        Self::data(err)
    }
}

pub type CliResult = Result<(), CliError>;

/// Writes the resolved configuration next to the outputs, so every run is
/// reproducible from its artifacts.
pub fn write_config_echo<T: serde::Serialize>(out_dir: &Path, config: &T) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let text = serde_json::to_string_pretty(config).expect("config serializes");
    std::fs::write(out_dir.join("run_config.json"), text)
}

/// Appends timestamped lines to `run.log`. Timestamps are confined here so
/// every other output stays byte-reproducible.
pub struct RunLog {
    file: std::fs::File,
}

impl RunLog {
    pub fn create(out_dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(out_dir.join("run.log"))?;
        Ok(Self { file })
    }

    pub fn line(&mut self, msg: &str) {
        let since_epoch = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let _ = writeln!(self.file, "[{since_epoch:.3}] {msg}");
    }
}

/// One JSON record per line.
pub fn write_jsonl<T: serde::Serialize>(path: &Path, records: &[T]) -> std::io::Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    std::fs::write(path, out)
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| anyhow::anyhow!("{} line {}: {e}", path.display(), i + 1))
        })
        .collect()
}

/// Accepts either manifest files or directories containing `manifest.json`,
/// recursing one level into directories of scenes.
pub fn discover_manifests(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut found = Vec::new();
    for input in inputs {
        if input.is_file() {
            found.push(input.clone());
        } else if input.is_dir() {
            let direct = input.join("manifest.json");
            if direct.is_file() {
                found.push(direct);
            } else {
                let mut subdirs: Vec<PathBuf> = std::fs::read_dir(input)
                    .map_err(|e| CliError::data(anyhow::anyhow!("{}: {e}", input.display())))?
                    .filter_map(|entry| entry.ok().map(|e| e.path()))
                    .filter(|p| p.is_dir() && p.join("manifest.json").is_file())
                    .map(|p| p.join("manifest.json"))
                    .collect();
                subdirs.sort();
                found.extend(subdirs);
            }
        } else {
            return Err(CliError::data(anyhow::anyhow!(
                "input {} does not exist",
                input.display()
            )));
        }
    }
    if found.is_empty() {
        return Err(CliError::usage("no manifests found among the inputs"));
    }
    Ok(found)
}
