use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Compute(#[from] stepfield::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(stepfield::Error::Parse(_)) => 2,
            CliError::Compute(_) | CliError::Io(_) => 3,
        }
    }

    pub fn to_json(&self) -> String {
        let (class, kind) = match self {
            CliError::Config(_) => ("ConfigError", "Config".to_string()),
            CliError::Compute(e) => {
                let kind = format!("{e:?}");
                let kind = kind.split(['(', ' ', '{']).next().unwrap_or("Unknown").to_string();
                if self.exit_code() == 2 {
                    ("ConfigError", kind)
                } else {
                    ("ComputeError", kind)
                }
            }
            CliError::Io(_) => ("ComputeError", "Io".to_string()),
        };
        json!({ "error": class, "kind": kind, "message": self.to_string(), "exit_code": self.exit_code() })
            .to_string()
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
