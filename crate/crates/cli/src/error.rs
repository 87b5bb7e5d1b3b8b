use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Missing file, malformed JSON, or failed validation. One message per problem.
    #[error("invalid config: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error(transparent)]
    Model(#[from] momentchain::Error),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    /// Machine-readable form for standard error.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Config(msgs) => json!({ "error": "invalid_config", "messages": msgs }),
            CliError::Model(e) => json!({ "error": "runtime", "message": e.to_string() }),
            CliError::Io(msg) => json!({ "error": "io", "message": msg }),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
