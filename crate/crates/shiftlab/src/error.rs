use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Core(#[from] shiftlab_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {what}")]
    Verification { what: String, details: Value },
}

impl CliError {
    pub fn verification(what: impl Into<String>, details: Value) -> Self {
        CliError::Verification { what: what.into(), details }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Core(_) => "numerical",
            CliError::Io(_) => "io",
            CliError::Verification { .. } => "verification",
        }
    }

    /// Process exit code: 1 for failed verifications, 2 for bad input, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification { .. } => 1,
            CliError::Config { .. } => 2,
            _ => 3,
        }
    }

    /// The machine-readable body of `failure.json`.
    pub fn to_json(&self, command: &str) -> Value {
        let mut v = json!({
            "command": command,
            "kind": self.kind(),
            "message": self.to_string(),
        });
        match self {
            CliError::Verification { details, .. } => v["details"] = details.clone(),
            CliError::Config { path, .. } => v["path"] = json!(path),
            _ => {}
        }
        v
    }
}
