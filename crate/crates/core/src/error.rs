use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced anywhere in the pipeline.
///
/// Variants split into input problems (bad files, invalid geometry, protocol
/// mismatches) and runtime failures (I/O while writing results); see
/// [`Error::is_validation`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("unsupported format_version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("placement error: overlapping objects {}", format_pairs(.pairs))]
    Placement { pairs: Vec<(String, String)> },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("unknown instance id `{0}`")]
    UnknownInstance(String),

    #[error("instance id `{0}` already exists")]
    DuplicateInstance(String),

    #[error("randomization failed: no valid placement for `{instance_id}` after {attempts} attempts")]
    Randomization { instance_id: String, attempts: u32 },

    #[error("invalid route: {}", format_violations(.0))]
    Route(Vec<crate::nav::RouteViolation>),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error in frame {frame_index}, object `{object_key}`: {message}")]
    Detection {
        frame_index: u32,
        object_key: String,
        message: String,
    },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("coverage error: object `{0}` has no ground-truth label")]
    Coverage(String),

    #[error("scene {index}: {error}")]
    Scene { index: usize, error: Box<Error> },
}

impl Error {
    /// True for errors caused by invalid inputs, false for runtime failures.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Write { .. } => false,
            Error::Scene { error, .. } => error.is_validation(),
            _ => true,
        }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("{a} <-> {b}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn format_violations(violations: &[crate::nav::RouteViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
