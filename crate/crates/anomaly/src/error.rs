use anomaly_core::CoreError;
use serde::Serialize;

use crate::format::to_json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("config: {0}")]
    Config(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 for bad input, 3 when the family does not have the required
    /// structure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::NotAnAnomaly { .. }
                | CoreError::Degenerate
                | CoreError::TypeMismatch { .. }
                | CoreError::ZeroCrossing(_)
                | CoreError::NonStrictlyDiffusive(_)
                | CoreError::NegativeQuadratic(_) => 3,
                CoreError::NotTraceless { .. }
                | CoreError::InvalidFamily(_)
                | CoreError::HatTooLarge { .. }
                | CoreError::InvalidParameter(_)
                | CoreError::NotInSl2 { .. } => 2,
            },
            CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "validation",
            3 => "classification",
            _ => "io",
        }
    }

    fn variant(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "invalid-argument",
            CliError::Config(_) => "invalid-config",
            CliError::Io { .. } => "io",
            CliError::Csv(_) => "csv",
            CliError::Core(e) => match e {
                CoreError::NotTraceless { .. } => "not-traceless",
                CoreError::InvalidFamily(_) => "invalid-family",
                CoreError::HatTooLarge { .. } => "hat-too-large",
                CoreError::NotAnAnomaly { .. } => "not-an-anomaly",
                CoreError::Degenerate => "degenerate",
                CoreError::TypeMismatch { .. } => "type-mismatch",
                CoreError::ZeroCrossing(_) => "zero-crossing",
                CoreError::NonStrictlyDiffusive(_) => "non-strictly-diffusive",
                CoreError::InvalidParameter(_) => "invalid-parameter",
                CoreError::NegativeQuadratic(_) => "negative-quadratic",
                CoreError::NotInSl2 { .. } => "not-in-sl2",
            },
        }
    }

    /// Error document written to stderr.
    pub fn to_json(&self, extra: Option<serde_json::Value>) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            error: &'a str,
            exit_code: i32,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            details: Option<serde_json::Value>,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            error: Body<'a>,
        }
        to_json(&Doc {
            error: Body {
                kind: self.kind(),
                error: self.variant(),
                exit_code: self.exit_code(),
                message: self.to_string(),
                details: extra,
            },
        })
    }
}
