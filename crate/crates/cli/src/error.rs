use std::fmt;
use std::path::Path;

/// Failure reported to the user as a single `error: kind=... msg=...` line.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub msg: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn new(kind: &'static str, msg: impl Into<String>) -> Self {
        Self { kind, msg: msg.into() }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Self::new("argument", msg)
    }

    pub fn incompatible(msg: impl Into<String>) -> Self {
        Self::new("incompatible", msg)
    }

    /// Prefixes the message with the file it concerns.
    pub fn at(mut self, path: &Path) -> Self {
        self.msg = format!("{}: {}", path.display(), self.msg);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg: String = self.msg.chars().map(|c| if c == '\n' || c == '\r' { ' ' } else { c }).collect();
        write!(f, "error: kind={} msg={}", self.kind, msg)
    }
}

impl From<topcov::Error> for CliError {
    fn from(e: topcov::Error) -> Self {
        Self::new(e.kind(), e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new("io", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::new("parse", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::new("json", e.to_string())
    }
}

impl From<toml::de::Error> for CliError {
    fn from(e: toml::de::Error) -> Self {
        Self::new("config", e.to_string())
    }
}

/// Runs a fallible file operation, attaching the path to any error.
pub fn with_path<T, E: Into<CliError>>(path: &Path, r: Result<T, E>) -> CliResult<T> {
    r.map_err(|e| e.into().at(path))
}
