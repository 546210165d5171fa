use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config: {0}")]
    Parse(String),

    #[error("invalid config: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error(transparent)]
    Core(#[from] kdl_core::Error),

    #[error("{} inequalities failed: {}", .0.len(), .0.join(", "))]
    VerificationFailed(Vec<String>),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io { .. } => "io",
            Self::Write { .. } => "write",
            Self::Parse(_) => "parse",
            Self::Invalid(_) => "invalid_config",
            Self::Core(e) => match e {
                kdl_core::Error::Config(_) => "config",
                kdl_core::Error::Domain(_) => "domain",
                kdl_core::Error::GridMismatch(_) => "grid_mismatch",
                kdl_core::Error::Precondition(_) => "precondition",
                kdl_core::Error::NonFinite { .. } => "non_finite",
                kdl_core::Error::Format(_) => "format",
            },
            Self::VerificationFailed(_) => "verification_failed",
        }
    }

    /// The structured form written to stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        match self {
            Self::Io { path, .. } | Self::Write { path, .. } => {
                v["path"] = json!(path.display().to_string());
            }
            Self::Invalid(list) => v["violations"] = json!(list),
            Self::VerificationFailed(ids) => v["failed"] = json!(ids),
            _ => {}
        }
        v
    }
}
